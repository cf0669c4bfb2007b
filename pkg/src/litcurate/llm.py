"""LLM provider contract plus HTTP and scripted (mock) implementations."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Protocol

import httpx

from .config import EngineConfig
from .errors import InvalidConfig, ServiceUnavailable


class LlmProvider(Protocol):
    name: str
    context_chars: int

    def complete(self, prompt: str) -> str:
        """Return the raw completion text; errors are raised, never hidden."""
        ...


class HttpLlmProvider:
    """Chat/completions-style JSON endpoint."""

    def __init__(
        self,
        base_url: str,
        model: str,
        context_chars: int,
        token: str = "",
        timeout: float = 300.0,
        transport=None,
    ):
        self.name = model
        self.context_chars = context_chars
        self.base_url = base_url
        self.model = model
        self._headers = {"Content-Type": "application/json"}
        if token:
            self._headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = self._client.post(self.base_url, json=body, headers=self._headers)
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(f"LLM endpoint unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ServiceUnavailable(f"LLM endpoint returned HTTP {response.status_code}")
        payload = response.json()
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ServiceUnavailable(f"malformed LLM response: {exc}") from exc


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


_ARTICLE_FENCE = "[Given Article Start]"


class MockLlmProvider:
    """Scripted responses from a JSON fixture, for tests and the simulator.

    Fixture keys:
      by_hash: {sha256(prompt): response}
      rules:   [{contains, response, section?}] matched in order; section
               "article" restricts matching to the text after the last
               article fence.
      default: fallback response.
    """

    def __init__(self, fixture: str | Path | dict = "", context_chars: int = 120000):
        self.name = "mock"
        self.context_chars = context_chars
        if isinstance(fixture, (str, Path)) and str(fixture):
            data = json.loads(Path(fixture).read_text(encoding="utf-8"))
        elif isinstance(fixture, dict):
            data = fixture
        else:
            data = {}
        self.by_hash = dict(data.get("by_hash", {}))
        self.rules = list(data.get("rules", []))
        self.default = data.get("default")
        self.calls: list[str] = []

    def complete(self, prompt: str) -> str:
        self.calls.append(prompt)
        digest = prompt_hash(prompt)
        if digest in self.by_hash:
            return self.by_hash[digest]
        article = prompt.rsplit(_ARTICLE_FENCE, 1)[-1]
        for rule in self.rules:
            target = article if rule.get("section") == "article" else prompt
            if rule.get("contains", "") in target:
                return rule["response"]
        if self.default is not None:
            return self.default
        raise ServiceUnavailable("mock LLM has no scripted response for this prompt")


def make_llm_provider(cfg: EngineConfig, transport=None) -> LlmProvider:
    if cfg.llm_provider == "mock":
        return MockLlmProvider(cfg.mock_fixture, context_chars=cfg.llm_context_chars)
    if cfg.llm_provider == "http":
        return HttpLlmProvider(
            cfg.llm_url,
            cfg.llm_model,
            cfg.llm_context_chars,
            token=cfg.llm_token,
            transport=transport,
        )
    raise InvalidConfig(f"unknown llm_provider: {cfg.llm_provider}")
