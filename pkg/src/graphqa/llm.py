"""Prompt templates and chat-completion access.

Two live backends are supported over HTTP -- an OpenAI-compatible
``/v1/chat/completions`` endpoint and an Ollama-style ``/api/generate``
endpoint -- plus a ``replay`` backend that answers from a recorded transcript
store, which is what makes every test and benchmark run deterministic.

Templates are data files, not code: each carries a ``{schema}`` and a
``{question}`` placeholder exactly once, and ``{{``/``}}`` escape literal
braces (so Cypher examples inside a template render with single braces).
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import requests

API_KEY_ENV_VAR = "LLM_API_KEY"

TEMPLATE_IDS = (
    "zero_shot",
    "one_shot",
    "few_shot",
    "simple",
    "syntax_emphasis",
    "social_engineering",
    "expert_role",
    "llama3_custom",
)

BACKENDS = ("openai_compatible", "ollama", "replay")


class LlmError(Exception):
    """Base class for completion failures."""


class LlmTransportError(LlmError):
    """Network-level failure: connection refused, DNS, timeout."""


class LlmHttpError(LlmError):
    """The backend answered with an HTTP error status."""

    def __init__(self, status_code: int, body: str):
        self.status_code = status_code
        self.body = body
        super().__init__(f"HTTP {status_code}: {body[:500]}")


class LlmProtocolError(LlmError):
    """The backend answered 200 but not in the expected shape."""


class ReplayMiss(LlmError):
    """No transcript entry exists for the requested prompt hash."""

    def __init__(self, prompt_hash: str):
        self.prompt_hash = prompt_hash
        super().__init__(f"no recorded response for prompt hash {prompt_hash}")


class TemplateError(Exception):
    """A prompt template file is missing or malformed."""


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str

    def __post_init__(self) -> None:
        for placeholder in ("{schema}", "{question}"):
            if self.body.count(placeholder) != 1:
                raise TemplateError(
                    f"template {self.id!r} must contain {placeholder} exactly once"
                )


@dataclass(frozen=True)
class LlmConfig:
    backend: str
    model_name: str
    endpoint_url: str = ""
    temperature: float = 0.0
    api_key: str | None = None
    timeout_seconds: float = 60.0
    max_tokens: int | None = None
    system_message: str | None = None  # None: everything goes in one user message

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r} (expected one of {BACKENDS})")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "LlmConfig":
        max_tokens = data.get("max_tokens")
        return cls(
            backend=data["backend"],
            model_name=data.get("model_name") or data.get("name") or data.get("model", ""),
            endpoint_url=data.get("endpoint_url", ""),
            temperature=float(data.get("temperature", 0.0)),
            api_key=data.get("api_key"),
            timeout_seconds=float(data.get("timeout_seconds", 60.0)),
            max_tokens=int(max_tokens) if max_tokens is not None else None,
            system_message=data.get("system_message"),
        )

    def resolved_api_key(self) -> str | None:
        return self.api_key or os.environ.get(API_KEY_ENV_VAR)


def _template_dir():
    return resources.files("graphqa").joinpath("data/templates")


def load_templates(directory: str | Path | None = None) -> list[PromptTemplate]:
    """Load the eight question templates, from the packaged data files by
    default, or from a user-supplied directory of ``<id>.txt`` files."""
    templates = []
    for template_id in TEMPLATE_IDS:
        if directory is None:
            ref = _template_dir().joinpath(f"{template_id}.txt")
            if not ref.is_file():
                raise TemplateError(f"missing template file for {template_id!r}")
            body = ref.read_text(encoding="utf-8")
        else:
            path = Path(directory) / f"{template_id}.txt"
            if not path.is_file():
                raise TemplateError(f"missing template file: {path}")
            body = path.read_text(encoding="utf-8")
        templates.append(PromptTemplate(id=template_id, body=body))
    return templates


def load_answer_template(directory: str | Path | None = None) -> str:
    """The sentence-composition prompt: placeholders {question} and {results}."""
    if directory is None:
        return _template_dir().joinpath("answer_sentence.txt").read_text(encoding="utf-8")
    return (Path(directory) / "answer_sentence.txt").read_text(encoding="utf-8")


_ESC_OPEN = "\x00brace-open\x00"
_ESC_CLOSE = "\x00brace-close\x00"


def render_placeholders(body: str, values: dict[str, str]) -> str:
    """Substitute ``{key}`` placeholders, honoring ``{{``/``}}`` escapes.

    Braces inside the substituted values pass through untouched.
    """
    out = body.replace("{{", _ESC_OPEN).replace("}}", _ESC_CLOSE)
    for key, value in values.items():
        out = out.replace("{" + key + "}", value)
    return out.replace(_ESC_OPEN, "{").replace(_ESC_CLOSE, "}")


def render_prompt(template: PromptTemplate, schema_text: str, question: str) -> str:
    return render_placeholders(template.body, {"schema": schema_text, "question": question})


def prompt_hash(model_name: str, prompt: str) -> str:
    """Content hash keying the transcript store: covers model and full prompt."""
    digest = hashlib.sha256()
    digest.update(model_name.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(prompt.encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class TranscriptEntry:
    prompt_hash: str
    prompt: str
    response: str
    recorded_at: str

    def to_json_dict(self) -> dict:
        return {
            "prompt_hash": self.prompt_hash,
            "prompt": self.prompt,
            "response": self.response,
            "recorded_at": self.recorded_at,
        }


class TranscriptStore:
    """Append-only JSON-lines store of prompt/response pairs.

    Reads are lock-free over an in-memory map; writes are serialized and
    flushed to disk immediately when the store is file-backed.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._responses: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        record = json.loads(line)
                        self._responses[record["prompt_hash"]] = record["response"]
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise LlmError(
                            f"{self.path}:{lineno}: corrupt transcript entry: {exc}"
                        ) from exc

    def lookup(self, hash_value: str) -> str | None:
        return self._responses.get(hash_value)

    def record(self, model_name: str, prompt: str, response: str) -> TranscriptEntry:
        entry = TranscriptEntry(
            prompt_hash=prompt_hash(model_name, prompt),
            prompt=prompt,
            response=response,
            recorded_at=datetime.now(timezone.utc).isoformat(),
        )
        with self._lock:
            self._responses[entry.prompt_hash] = entry.response
            if self.path is not None:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry.to_json_dict()) + "\n")
        return entry

    def __len__(self) -> int:
        return len(self._responses)


def complete(
    config: LlmConfig,
    prompt: str,
    transcripts: TranscriptStore | None = None,
    record: bool = False,
) -> str:
    """Send one prompt, return the completion text.

    ``replay`` answers byte-exactly from the transcript store with no network
    activity; live backends optionally persist what they saw when ``record``
    is set.
    """
    if config.backend == "replay":
        if transcripts is None:
            raise LlmError("replay backend requires a transcript store")
        hash_value = prompt_hash(config.model_name, prompt)
        response = transcripts.lookup(hash_value)
        if response is None:
            raise ReplayMiss(hash_value)
        return response

    if config.backend == "openai_compatible":
        response = _complete_openai(config, prompt)
    else:
        response = _complete_ollama(config, prompt)
    if record:
        if transcripts is None:
            raise LlmError("recording requires a transcript store")
        transcripts.record(config.model_name, prompt, response)
    return response


def _post_json(config: LlmConfig, url: str, payload: dict, headers: dict) -> dict:
    try:
        resp = requests.post(
            url, json=payload, headers=headers, timeout=config.timeout_seconds
        )
    except requests.RequestException as exc:
        raise LlmTransportError(f"request to {url} failed: {exc}") from exc
    if resp.status_code >= 400:
        raise LlmHttpError(resp.status_code, resp.text)
    try:
        return resp.json()
    except ValueError as exc:
        raise LlmProtocolError(f"non-JSON response from {url}") from exc


def _complete_openai(config: LlmConfig, prompt: str) -> str:
    url = config.endpoint_url.rstrip("/") + "/v1/chat/completions"
    headers = {}
    api_key = config.resolved_api_key()
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    messages = []
    if config.system_message:
        messages.append({"role": "system", "content": config.system_message})
    messages.append({"role": "user", "content": prompt})
    payload = {
        "model": config.model_name,
        "temperature": config.temperature,
        "messages": messages,
    }
    if config.max_tokens is not None:
        payload["max_tokens"] = config.max_tokens
    data = _post_json(config, url, payload, headers)
    try:
        return data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise LlmProtocolError(
            "response lacks choices[0].message.content"
        ) from exc


def _complete_ollama(config: LlmConfig, prompt: str) -> str:
    url = config.endpoint_url.rstrip("/") + "/api/generate"
    options: dict = {"temperature": config.temperature}
    if config.max_tokens is not None:
        options["num_predict"] = config.max_tokens
    payload = {
        "model": config.model_name,
        "prompt": prompt,
        "stream": False,
        "options": options,
    }
    if config.system_message:
        payload["system"] = config.system_message
    data = _post_json(config, url, payload, {})
    try:
        return data["response"]
    except (KeyError, TypeError) as exc:
        raise LlmProtocolError("response lacks the 'response' field") from exc
