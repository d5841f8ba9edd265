"""Provider-agnostic chat access with token and search cost metering.

Two backends are supported: an HTTP client speaking the common
chat-completions shape (messages array in, ``choices[0].message.content``
out), and a deterministic scripted mock that replays responses from a
directory of ``<prompt-hash>.txt`` transcript files. Token counts are a
documented approximation (whitespace tokens x 1.3, rounded up) since no
tokenizer is bundled; reports flag them as estimated.
"""

from __future__ import annotations

import hashlib
import math
import os
import threading
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Optional

import requests

from .errors import AuthError, GatewayError, GatewayTimeout, ProviderError, RateLimited

ONE_MILLION = Decimal(1_000_000)

# gpt-3.5-turbo-0125 list prices (USD per 1M tokens); overridable via env/params
DEFAULT_PRICE_IN = Decimal("0.5")
DEFAULT_PRICE_OUT = Decimal("1.5")
DEFAULT_SEARCH_PRICE = Decimal("0.001")


def estimate_tokens(text: str) -> int:
    """Whitespace-token count x 1.3, rounded up. Estimated, not exact."""
    if not text:
        return 0
    return math.ceil(len(text.split()) * 1.3)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


@dataclass
class CostMeter:
    """Exact-decimal accounting of tokens and searches.

    total = tokens_in * price_in/1e6 + tokens_out * price_out/1e6
          + searches * search_price, with no binary floating point anywhere.
    """

    price_in: Decimal = DEFAULT_PRICE_IN
    price_out: Decimal = DEFAULT_PRICE_OUT
    search_price: Decimal = DEFAULT_SEARCH_PRICE
    tokens_in: int = 0
    tokens_out: int = 0
    searches: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add_tokens(self, tokens_in: int, tokens_out: int) -> None:
        with self._lock:
            self.tokens_in += tokens_in
            self.tokens_out += tokens_out

    def add_search(self, n: int = 1) -> None:
        with self._lock:
            self.searches += n

    @property
    def total(self) -> Decimal:
        return (
            Decimal(self.tokens_in) * self.price_in / ONE_MILLION
            + Decimal(self.tokens_out) * self.price_out / ONE_MILLION
            + Decimal(self.searches) * self.search_price
        )

    def total_display(self) -> str:
        """Rounded half-even to cents; only for display, never accumulation."""
        return str(self.total.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))

    def snapshot(self) -> tuple[int, int, int, Decimal]:
        with self._lock:
            return (self.tokens_in, self.tokens_out, self.searches, self.total)

    def merge(self, other: "CostMeter") -> "CostMeter":
        """Counter-wise sum; prices must agree."""
        if (self.price_in, self.price_out, self.search_price) != (
            other.price_in,
            other.price_out,
            other.search_price,
        ):
            raise ValueError("cannot merge meters with different prices")
        return CostMeter(
            price_in=self.price_in,
            price_out=self.price_out,
            search_price=self.search_price,
            tokens_in=self.tokens_in + other.tokens_in,
            tokens_out=self.tokens_out + other.tokens_out,
            searches=self.searches + other.searches,
        )


def meter_total(meter: CostMeter) -> Decimal:
    return meter.total


@dataclass
class ChatResult:
    text: str
    tokens_in: int
    tokens_out: int


class ModelGateway:
    """Chat access front door shared by all LLM-dependent solvers.

    backend "http_chat" posts to ``{base_url}/chat/completions``; backend
    "scripted_mock" replays transcripts from ``transcript_dir``. A transcript
    file named after the prompt hash wins; ``default.txt`` acts as the
    fallback reply when present.
    """

    def __init__(
        self,
        backend: str = "scripted_mock",
        model_name: str = "mock",
        meter: Optional[CostMeter] = None,
        base_url: str = "",
        api_key: str = "",
        transcript_dir: Optional[str | Path] = None,
        timeout_ms: int = 30_000,
        max_retries: int = 2,
        backoff_base_s: float = 0.5,
        session: Optional[requests.Session] = None,
    ):
        if backend not in ("http_chat", "scripted_mock"):
            raise ValueError(f"unknown backend {backend!r}")
        if timeout_ms <= 0:
            raise ValueError("timeout must be > 0")
        self.backend = backend
        self.model_name = model_name
        self.meter = meter if meter is not None else CostMeter()
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.transcript_dir = Path(transcript_dir) if transcript_dir else None
        self.timeout_ms = timeout_ms
        self.max_retries = max_retries
        self.backoff_base_s = backoff_base_s
        self._session = session or requests.Session()

    def chat(self, prompt: str, temperature: float = 0.0, max_tokens: int = 1024) -> ChatResult:
        if self.backend == "scripted_mock":
            result = self._chat_mock(prompt)
        else:
            result = self._chat_http(prompt, temperature, max_tokens)
        self.meter.add_tokens(result.tokens_in, result.tokens_out)
        return result

    # -- scripted mock --------------------------------------------------------

    def _chat_mock(self, prompt: str) -> ChatResult:
        if self.transcript_dir is None:
            raise GatewayError("scripted mock requires a transcript directory")
        key = prompt_hash(prompt)
        path = self.transcript_dir / f"{key}.txt"
        if not path.exists():
            path = self.transcript_dir / "default.txt"
        if not path.exists():
            raise GatewayError(
                f"no transcript for prompt hash {key} under {self.transcript_dir}"
            )
        text = path.read_text(encoding="utf-8")
        return ChatResult(text=text, tokens_in=estimate_tokens(prompt), tokens_out=estimate_tokens(text))

    # -- HTTP chat-completions -------------------------------------------------

    def _chat_http(self, prompt: str, temperature: float, max_tokens: int) -> ChatResult:
        payload = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: GatewayError | None = None
        for attempt in range(self.max_retries + 1):
            if attempt > 0:
                time.sleep(self.backoff_base_s * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout_ms / 1000.0,
                )
            except requests.Timeout:
                last_error = GatewayTimeout(f"timed out after {self.timeout_ms}ms")
                continue
            except requests.RequestException as exc:
                last_error = GatewayError(str(exc))
                continue

            if resp.status_code in (401, 403):
                raise AuthError(f"authentication failed ({resp.status_code})")
            if resp.status_code == 429:
                retry_after = _parse_retry_after(resp)
                last_error = RateLimited(retry_after)
                continue
            if resp.status_code >= 500:
                last_error = ProviderError(resp.status_code, resp.text[:200])
                continue
            if resp.status_code != 200:
                raise ProviderError(resp.status_code, resp.text[:200])

            body = resp.json()
            text = body["choices"][0]["message"]["content"]
            usage = body.get("usage", {})
            return ChatResult(
                text=text,
                tokens_in=int(usage.get("prompt_tokens", estimate_tokens(prompt))),
                tokens_out=int(usage.get("completion_tokens", estimate_tokens(text))),
            )
        raise last_error if last_error is not None else GatewayError("chat failed")


def _parse_retry_after(resp: requests.Response) -> float | None:
    value = resp.headers.get("Retry-After")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


def gateway_from_env(meter: Optional[CostMeter] = None) -> ModelGateway:
    """Build a gateway from OFC_LLM_* / OFC_PRICE_* environment variables.

    A base URL of the form ``mock://<transcript-dir>`` selects the scripted
    mock backend; anything else is treated as an HTTP chat endpoint.
    """
    base_url = os.environ.get("OFC_LLM_BASE_URL", "")
    model = os.environ.get("OFC_LLM_MODEL", "mock")
    meter = meter if meter is not None else meter_from_env()
    if base_url.startswith("mock://"):
        return ModelGateway(
            backend="scripted_mock",
            model_name=model,
            meter=meter,
            transcript_dir=base_url[len("mock://"):],
        )
    if not base_url:
        raise GatewayError(
            "OFC_LLM_BASE_URL is not set (use mock://<dir> for the scripted mock)"
        )
    return ModelGateway(
        backend="http_chat",
        model_name=model,
        meter=meter,
        base_url=base_url,
        api_key=os.environ.get("OFC_LLM_API_KEY", ""),
    )


def meter_from_env() -> CostMeter:
    return CostMeter(
        price_in=Decimal(os.environ.get("OFC_PRICE_IN", str(DEFAULT_PRICE_IN))),
        price_out=Decimal(os.environ.get("OFC_PRICE_OUT", str(DEFAULT_PRICE_OUT))),
        search_price=Decimal(os.environ.get("OFC_SEARCH_PRICE", str(DEFAULT_SEARCH_PRICE))),
    )
