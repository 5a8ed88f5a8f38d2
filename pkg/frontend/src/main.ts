/** Browser entry point. The service base URL can be set with a
 * `?service=` query parameter or a FUSIONRAG_SERVICE_URL global; it
 * defaults to the service's default local address. */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

const DEFAULT_SERVICE_URL = "http://127.0.0.1:8642";

function serviceUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  if (fromQuery) {
    return fromQuery;
  }
  const fromGlobal = (window as { FUSIONRAG_SERVICE_URL?: string })
    .FUSIONRAG_SERVICE_URL;
  return fromGlobal ?? DEFAULT_SERVICE_URL;
}

const root = document.querySelector<HTMLElement>("#app");
if (root) {
  new App(root, new ApiClient(serviceUrl())).mount();
}
