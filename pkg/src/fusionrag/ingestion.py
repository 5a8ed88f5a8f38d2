"""Corpus loading and chunking.

Loads plain-text / Markdown product documents from a directory tree,
splits them into retrieval-sized chunks, and assembles a manifest.  PDFs
are assumed pre-converted; an optional ``<filename>.meta.json`` sidecar
supplies doc_type / title / product metadata (datasheet vs selection
guide and the like).

Chunk ids are ``doc_id#position``; chunking is deterministic for a fixed
(raw_text, config) pair.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyCorpusError, EmptyDocumentError
from .models import DocumentChunk

DEFAULT_GLOBS = ("**/*.md", "**/*.txt")

SPLIT_MODES = ("paragraph", "sentence", "fixed")

_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")
_PARAGRAPH_BREAK = re.compile(r"\n\s*\n")


@dataclass(frozen=True)
class ChunkingConfig:
    """How documents are cut into chunks.

    Defaults keep several chunks per datasheet section; override per
    corpus.  ``overlap_chars`` only applies to fixed mode.
    """

    max_chars: int = 1200
    overlap_chars: int = 120
    split_on: str = "paragraph"

    def __post_init__(self):
        if self.max_chars < 1:
            raise ValueError("max_chars must be positive")
        if self.overlap_chars < 0:
            raise ValueError("overlap_chars must be >= 0")
        if self.overlap_chars >= self.max_chars:
            raise ValueError("overlap_chars must be < max_chars")
        if self.split_on not in SPLIT_MODES:
            raise ValueError(f"split_on must be one of {SPLIT_MODES}")

    def to_dict(self) -> dict:
        return {"max_chars": self.max_chars, "overlap_chars": self.overlap_chars,
                "split_on": self.split_on}

    @classmethod
    def from_dict(cls, d: dict) -> "ChunkingConfig":
        return cls(max_chars=int(d.get("max_chars", 1200)),
                   overlap_chars=int(d.get("overlap_chars", 120)),
                   split_on=d.get("split_on", "paragraph"))


@dataclass(frozen=True)
class LoadedDocument:
    doc_id: str
    raw_text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class LoadFailure:
    """One unreadable file; loading continues past these."""

    path: str
    reason: str


@dataclass(frozen=True)
class DocumentInfo:
    doc_id: str
    source_path: str
    doc_type: str
    title: str

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "source_path": self.source_path,
                "doc_type": self.doc_type, "title": self.title}

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentInfo":
        return cls(doc_id=d["doc_id"], source_path=d["source_path"],
                   doc_type=d["doc_type"], title=d["title"])


@dataclass(frozen=True)
class CorpusManifest:
    corpus_id: str
    documents: tuple[DocumentInfo, ...]
    chunking: ChunkingConfig
    chunk_count: int

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "documents": [d.to_dict() for d in self.documents],
            "chunking": self.chunking.to_dict(),
            "chunk_count": self.chunk_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusManifest":
        return cls(
            corpus_id=d["corpus_id"],
            documents=tuple(DocumentInfo.from_dict(x) for x in d["documents"]),
            chunking=ChunkingConfig.from_dict(d["chunking"]),
            chunk_count=int(d["chunk_count"]),
        )


def _read_sidecar(path: Path) -> dict[str, str]:
    sidecar = path.with_name(path.name + ".meta.json")
    if not sidecar.exists():
        return {}
    try:
        data = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return {}
    return {k: str(v) for k, v in data.items() if isinstance(k, str)}


def load_documents(
    root_path: str | Path,
    include_globs: tuple[str, ...] = DEFAULT_GLOBS,
) -> tuple[list[LoadedDocument], list[LoadFailure]]:
    """Load every file matching the globs under root_path.

    doc_id is the forward-slash path relative to root.  Unreadable files
    are collected as failures and the rest still load; zero matches is an
    EmptyCorpusError.  ``*.meta.json`` sidecars are never documents.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise EmptyCorpusError(f"corpus root {root} is not a readable directory")

    matched: set[Path] = set()
    for pattern in include_globs:
        for path in root.glob(pattern):
            if path.is_file() and not path.name.endswith(".meta.json"):
                matched.add(path)

    if not matched:
        raise EmptyCorpusError(
            f"no files under {root} matched {list(include_globs)}"
        )

    documents: list[LoadedDocument] = []
    failures: list[LoadFailure] = []
    for path in sorted(matched):
        doc_id = path.relative_to(root).as_posix()
        try:
            raw_text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            failures.append(LoadFailure(path=str(path), reason=str(exc)))
            continue
        metadata = {"doc_type": "unknown"}
        metadata.update(_read_sidecar(path))
        documents.append(LoadedDocument(doc_id=doc_id, raw_text=raw_text,
                                        metadata=metadata))
    return documents, failures


def _pack_pieces(pieces: list[str], max_chars: int, joiner: str) -> list[str]:
    """Greedily pack pieces into strings of at most max_chars; a single
    oversized piece falls back to fixed windows."""
    packed: list[str] = []
    current = ""
    for piece in pieces:
        if len(piece) > max_chars:
            if current:
                packed.append(current)
                current = ""
            packed.extend(_fixed_windows(piece, max_chars, 0))
            continue
        candidate = piece if not current else current + joiner + piece
        if len(candidate) <= max_chars:
            current = candidate
        else:
            packed.append(current)
            current = piece
    if current:
        packed.append(current)
    return packed


def _fixed_windows(text: str, max_chars: int, overlap_chars: int) -> list[str]:
    step = max_chars - overlap_chars
    windows = []
    start = 0
    while True:
        windows.append(text[start:start + max_chars])
        if start + max_chars >= len(text):
            return windows
        start += step


def chunk_text(doc_id: str, raw_text: str, config: ChunkingConfig,
               metadata: dict[str, str] | None = None) -> list[DocumentChunk]:
    """Split one document into DocumentChunks.

    fixed: verbatim windows of max_chars, consecutive windows sharing
    exactly overlap_chars characters (so zero-overlap windows concatenate
    back to the trimmed text).  paragraph/sentence: split on blank lines /
    sentence terminators, then greedily pack up to max_chars.

    Windows that are entirely whitespace cannot form valid chunks and are
    dropped.
    """
    if not raw_text.strip():
        raise EmptyDocumentError(f"document {doc_id!r} is empty after trimming")

    text = raw_text.strip()
    if config.split_on == "fixed":
        pieces = _fixed_windows(text, config.max_chars, config.overlap_chars)
    elif config.split_on == "paragraph":
        paragraphs = [p.strip() for p in _PARAGRAPH_BREAK.split(text) if p.strip()]
        pieces = _pack_pieces(paragraphs, config.max_chars, "\n\n")
    else:
        sentences = [s.strip() for s in _SENTENCE_END.split(text) if s.strip()]
        pieces = _pack_pieces(sentences, config.max_chars, " ")

    chunks = []
    meta = dict(metadata or {})
    position = 0
    for piece in pieces:
        if not piece.strip():
            continue
        chunks.append(DocumentChunk(
            chunk_id=f"{doc_id}#{position}",
            doc_id=doc_id,
            text=piece,
            position=position,
            metadata=meta,
        ))
        position += 1
    return chunks


def build_corpus(
    root_path: str | Path,
    include_globs: tuple[str, ...] = DEFAULT_GLOBS,
    config: ChunkingConfig | None = None,
) -> tuple[CorpusManifest, list[DocumentChunk], list[LoadFailure]]:
    """Load, chunk, and assemble the manifest for a corpus directory.

    corpus_id is a content hash, so re-ingesting identical inputs yields
    an identical id.
    """
    config = config or ChunkingConfig()
    documents, failures = load_documents(root_path, include_globs)

    all_chunks: list[DocumentChunk] = []
    infos = []
    digest = hashlib.sha256(json.dumps(config.to_dict(), sort_keys=True).encode())
    for doc in documents:
        try:
            chunks = chunk_text(doc.doc_id, doc.raw_text, config,
                                metadata=doc.metadata)
        except EmptyDocumentError as exc:
            failures.append(LoadFailure(path=doc.doc_id, reason=str(exc)))
            continue
        all_chunks.extend(chunks)
        infos.append(DocumentInfo(
            doc_id=doc.doc_id,
            source_path=str(Path(root_path) / doc.doc_id),
            doc_type=doc.metadata.get("doc_type", "unknown"),
            title=doc.metadata.get("title", doc.doc_id),
        ))
        digest.update(doc.doc_id.encode())
        digest.update(doc.raw_text.encode())

    manifest = CorpusManifest(
        corpus_id=digest.hexdigest()[:16],
        documents=tuple(infos),
        chunking=config,
        chunk_count=len(all_chunks),
    )
    return manifest, all_chunks, failures


def write_corpus(directory: str | Path, manifest: CorpusManifest,
                 chunks: list[DocumentChunk]) -> None:
    """Persist corpus.manifest.json plus chunks.jsonl (one chunk per line)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "corpus.manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    with (directory / "chunks.jsonl").open("w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk.to_dict(), sort_keys=True,
                                ensure_ascii=False) + "\n")


def read_corpus(directory: str | Path) -> tuple[CorpusManifest, list[DocumentChunk]]:
    directory = Path(directory)
    manifest = CorpusManifest.from_dict(json.loads(
        (directory / "corpus.manifest.json").read_text(encoding="utf-8")))
    chunks = []
    with (directory / "chunks.jsonl").open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                chunks.append(DocumentChunk.from_dict(json.loads(line)))
    return manifest, chunks
