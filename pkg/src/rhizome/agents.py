"""LLM call layer shared by every agent: structured prompting with schema
validation, a deterministic fixture provider, and per-call accounting."""

from __future__ import annotations

import asyncio
import hashlib
import json
import math
import re
import time
from dataclasses import dataclass
from pathlib import Path

import httpx
import jsonschema

DEFAULT_MAX_IN_FLIGHT = 8
VALIDATION_RETRIES = 2
TRANSPORT_RETRIES = 2

# Appended verbatim on every corrective re-prompt; fixture keys depend on it.
CORRECTIVE_SUFFIX = (
    "\n\nYour previous reply did not validate against the required schema. "
    "Reply again with exactly one JSON object that satisfies the schema, "
    "and nothing else."
)


class AgentFailure(Exception):
    """Structured output still invalid after the retry budget."""

    def __init__(self, agent_name: str, reason: str):
        super().__init__(f"agent {agent_name!r} failed: {reason}")
        self.agent_name = agent_name
        self.reason = reason


class ProviderTransportError(Exception):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class FixtureKeyError(ProviderTransportError):
    """Fixture mode saw a call it has no recording for: a hard error so
    missing test coverage stays loud."""

    def __init__(self, key: str):
        super().__init__(f"no fixture recorded for key {key}", retryable=False)
        self.key = key


class MalformedOutputError(Exception):
    """Model reply was not parseable JSON; triggers a corrective re-prompt."""

    def __init__(self, message: str, usage: "TokenUsage | None" = None):
        super().__init__(message)
        self.usage = usage


@dataclass(frozen=True)
class TokenUsage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.input_tokens + other.input_tokens,
            self.output_tokens + other.output_tokens,
        )


@dataclass(frozen=True)
class AgentCall:
    agent_name: str
    prompt: str
    response_schema_id: str
    temperature: float = 0.2
    max_output_tokens: int = 1024


@dataclass
class AgentResponse:
    payload: dict
    confidence: float
    usage: TokenUsage
    latency_ms: float


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # "live-http" | "fixture"
    endpoint: str | None = None
    model_name: str | None = None
    fixture_path: str | None = None

    def validate(self) -> list[str]:
        problems = []
        if self.kind not in ("live-http", "fixture"):
            problems.append(f"unknown provider kind {self.kind!r}")
        if self.kind == "live-http" and not self.endpoint:
            problems.append("live-http provider requires an endpoint")
        if self.kind == "fixture" and not self.fixture_path:
            problems.append("fixture provider requires a fixture_path")
        return problems


class SchemaRegistry:
    """Response schemas, each required to carry a numeric confidence field."""

    def __init__(self):
        self._schemas: dict[str, dict] = {}

    def register(self, schema_id: str, schema: dict) -> None:
        required = schema.get("required", [])
        props = schema.get("properties", {})
        if "confidence" not in required or "confidence" not in props:
            raise ValueError(f"schema {schema_id!r} must require a confidence field")
        jsonschema.Draft7Validator.check_schema(schema)
        self._schemas[schema_id] = schema

    def __contains__(self, schema_id: str) -> bool:
        return schema_id in self._schemas

    def validate(self, schema_id: str, payload) -> None:
        if schema_id not in self._schemas:
            raise KeyError(f"schema {schema_id!r} not registered")
        jsonschema.validate(payload, self._schemas[schema_id])


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def _agent_slug(agent_name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", agent_name)


def fixture_file(fixture_dir: str | Path, agent_name: str, prompt: str) -> Path:
    return Path(fixture_dir) / f"{_agent_slug(agent_name)}__{prompt_key(prompt)}.json"


def _estimate_tokens(text: str) -> int:
    return max(1, math.ceil(len(text) / 4))


class FixtureProvider:
    """Replays recorded payloads keyed by (agent_name, prompt hash)."""

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    async def complete(self, call: AgentCall) -> tuple[dict, TokenUsage]:
        path = fixture_file(self.fixture_dir, call.agent_name, call.prompt)
        if not path.exists():
            raise FixtureKeyError(str(path.name))
        stored = json.loads(path.read_text(encoding="utf-8"))
        payload = stored["payload"]
        usage = stored.get("usage")
        if usage:
            return payload, TokenUsage(usage["input_tokens"], usage["output_tokens"])
        return payload, TokenUsage(
            _estimate_tokens(call.prompt),
            _estimate_tokens(json.dumps(payload, sort_keys=True)),
        )


def write_llm_fixture(
    fixture_dir: str | Path,
    agent_name: str,
    prompt: str,
    payload: dict,
    usage: TokenUsage | None = None,
) -> Path:
    """Record one fixture entry; the inverse of FixtureProvider lookup."""
    path = fixture_file(fixture_dir, agent_name, prompt)
    path.parent.mkdir(parents=True, exist_ok=True)
    body: dict = {"agent_name": agent_name, "prompt_key": prompt_key(prompt), "payload": payload}
    if usage is not None:
        body["usage"] = {
            "input_tokens": usage.input_tokens,
            "output_tokens": usage.output_tokens,
        }
    path.write_text(json.dumps(body, indent=2, sort_keys=True), encoding="utf-8")
    return path


_JSON_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_json_object(content: str) -> dict:
    """Pull the first JSON object out of a model reply."""
    text = content.strip()
    fenced = _JSON_FENCE.search(text)
    if fenced:
        text = fenced.group(1).strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        start = text.find("{")
        if start < 0:
            raise ValueError("no JSON object in model output")
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    return json.loads(text[start : i + 1])
        raise ValueError("unbalanced JSON object in model output")


class LiveHttpProvider:
    """Chat-completion client for a local model server (OpenAI-style API)."""

    def __init__(self, endpoint: str, model_name: str | None = None, timeout: float = 120.0,
                 client: httpx.AsyncClient | None = None):
        self.endpoint = endpoint
        self.model_name = model_name or "mistral"
        self._client = client or httpx.AsyncClient(timeout=timeout)

    async def complete(self, call: AgentCall) -> tuple[dict, TokenUsage]:
        body = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": call.prompt}],
            "temperature": call.temperature,
            "max_tokens": call.max_output_tokens,
        }
        try:
            resp = await self._client.post(self.endpoint, json=body)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise ProviderTransportError(f"model endpoint error: {exc}") from exc
        data = resp.json()
        content = data["choices"][0]["message"]["content"]
        usage = data.get("usage") or {}
        spent = TokenUsage(
            int(usage.get("prompt_tokens", _estimate_tokens(call.prompt))),
            int(usage.get("completion_tokens", _estimate_tokens(content))),
        )
        try:
            payload = extract_json_object(content)
        except ValueError as exc:
            raise MalformedOutputError(str(exc), spent) from exc
        return payload, spent

    async def aclose(self) -> None:
        await self._client.aclose()


def make_provider(config: ProviderConfig):
    problems = config.validate()
    if problems:
        raise ValueError("; ".join(problems))
    if config.kind == "fixture":
        return FixtureProvider(config.fixture_path)
    return LiveHttpProvider(config.endpoint, config.model_name)


def clamp_confidence(value) -> float:
    try:
        conf = float(value)
    except (TypeError, ValueError):
        return 0.0
    return min(1.0, max(0.0, conf))


@dataclass
class CallRecord:
    agent_name: str
    schema_id: str
    usage: TokenUsage
    latency_ms: float
    confidence: float

    def to_dict(self) -> dict:
        return {
            "agent_name": self.agent_name,
            "schema_id": self.schema_id,
            "input_tokens": self.usage.input_tokens,
            "output_tokens": self.usage.output_tokens,
            "latency_ms": self.latency_ms,
            "confidence": self.confidence,
        }


class AgentRuntime:
    """One per run: shared provider, bounded in-flight calls, call ledger."""

    def __init__(
        self,
        provider,
        registry: SchemaRegistry,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        transport_backoff: float = 0.5,
    ):
        self.provider = provider
        self.registry = registry
        self.records: list[CallRecord] = []
        self._semaphore = asyncio.Semaphore(max_in_flight)
        self._backoff = transport_backoff

    async def call(self, call: AgentCall) -> AgentResponse:
        if not call.agent_name:
            raise ValueError("agent_name must be non-empty")
        if call.response_schema_id not in self.registry:
            raise KeyError(f"schema {call.response_schema_id!r} not registered")
        async with self._semaphore:
            response = await self._complete_structured(call)
        self.records.append(
            CallRecord(
                agent_name=call.agent_name,
                schema_id=call.response_schema_id,
                usage=response.usage,
                latency_ms=response.latency_ms,
                confidence=response.confidence,
            )
        )
        return response

    async def _complete_structured(self, call: AgentCall) -> AgentResponse:
        started = time.perf_counter()
        usage_total = TokenUsage()
        prompt = call.prompt
        last_error = "unknown"
        for attempt in range(VALIDATION_RETRIES + 1):
            attempt_call = AgentCall(
                agent_name=call.agent_name,
                prompt=prompt,
                response_schema_id=call.response_schema_id,
                temperature=call.temperature,
                max_output_tokens=call.max_output_tokens,
            )
            try:
                payload, usage = await self._raw_complete(attempt_call)
            except MalformedOutputError as exc:
                if exc.usage is not None:
                    usage_total = usage_total + exc.usage
                last_error = str(exc)
                prompt = call.prompt + CORRECTIVE_SUFFIX
                continue
            usage_total = usage_total + usage
            try:
                self.registry.validate(call.response_schema_id, payload)
            except jsonschema.ValidationError as exc:
                last_error = exc.message
                prompt = call.prompt + CORRECTIVE_SUFFIX
                continue
            latency_ms = (time.perf_counter() - started) * 1000.0
            return AgentResponse(
                payload=payload,
                confidence=clamp_confidence(payload.get("confidence")),
                usage=usage_total,
                latency_ms=latency_ms,
            )
        raise AgentFailure(call.agent_name, f"schema validation failed after retries: {last_error}")

    async def _raw_complete(self, call: AgentCall) -> tuple[dict, TokenUsage]:
        for attempt in range(TRANSPORT_RETRIES + 1):
            try:
                return await self.provider.complete(call)
            except ProviderTransportError as exc:
                if not exc.retryable or attempt == TRANSPORT_RETRIES:
                    raise
                await asyncio.sleep(self._backoff * (2**attempt))
        raise AgentFailure(call.agent_name, "transport retries exhausted")


def aggregate_metrics(records: list[CallRecord]) -> dict:
    """Per-agent token/latency/confidence sums plus grand totals."""
    agents: dict[str, dict] = {}
    for record in records:
        entry = agents.setdefault(
            record.agent_name,
            {
                "calls": 0,
                "input_tokens": 0,
                "output_tokens": 0,
                "latency_ms": 0.0,
                "_confidences": [],
            },
        )
        entry["calls"] += 1
        entry["input_tokens"] += record.usage.input_tokens
        entry["output_tokens"] += record.usage.output_tokens
        entry["latency_ms"] += record.latency_ms
        entry["_confidences"].append(record.confidence)
    for entry in agents.values():
        confs = entry.pop("_confidences")
        entry["mean_confidence"] = sum(confs) / len(confs) if confs else 0.0
    totals = {
        "calls": sum(e["calls"] for e in agents.values()),
        "input_tokens": sum(e["input_tokens"] for e in agents.values()),
        "output_tokens": sum(e["output_tokens"] for e in agents.values()),
        "latency_ms": sum(e["latency_ms"] for e in agents.values()),
        "mean_confidence": (
            sum(r.confidence for r in records) / len(records) if records else 0.0
        ),
    }
    return {"agents": {name: agents[name] for name in sorted(agents)}, "totals": totals}
