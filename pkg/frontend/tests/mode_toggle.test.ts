// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import type { Mode } from "../src/types.js";
import { FakeService, flush } from "./helpers.js";

// deterministic 32-bit generator so the scripted run is reproducible
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

let root: HTMLElement;
let api: FakeService;

beforeEach(() => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.appendChild(root);
  api = new FakeService();
  new App(root, api).mount();
});

function setMode(mode: Mode): void {
  root.querySelector<HTMLInputElement>(
    `#mode-toggle input[value="${mode}"]`,
  )!.checked = true;
}

async function submit(query: string): Promise<void> {
  root.querySelector<HTMLInputElement>("#query-input")!.value = query;
  root
    .querySelector<HTMLFormElement>("#chat-form")!
    .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
  await flush();
}

describe("mode toggle", () => {
  it("sends the toggled mode on every one of 20 scripted submissions", async () => {
    const rand = mulberry32(20260823);
    const scripted: Mode[] = [];
    for (let i = 0; i < 20; i++) {
      const mode: Mode = rand() < 0.5 ? "rag" : "rag_fusion";
      scripted.push(mode);
      setMode(mode);
      await submit(`scripted question ${i}`);
    }
    expect(scripted).toContain("rag");
    expect(scripted).toContain("rag_fusion");
    expect(api.chatCalls.length).toBe(20);
    expect(api.chatCalls.map((call) => call.mode)).toEqual(scripted);
    expect(api.chatCalls.map((call) => call.query)).toEqual(
      scripted.map((_, i) => `scripted question ${i}`),
    );
  });

  it("defaults to fused multi-query", async () => {
    await submit("default mode question");
    expect(api.chatCalls[0]!.mode).toBe("rag_fusion");
  });
});
