import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from factagent.llm import (
    AuthenticationError,
    BudgetExceeded,
    CompletionResult,
    Gateway,
    HTTPChatProvider,
    PromptRequest,
    ProviderRejection,
    RateLimited,
    RetryPolicy,
    ScriptedProvider,
    TransportError,
    dump_script,
    load_script,
)


def test_scripted_fifo_and_transcript():
    provider = ScriptedProvider(["a", "b"])
    req = PromptRequest("hello")
    assert provider.complete(req).text == "a"
    assert provider.complete(req).text == "b"
    assert provider.transcript == [req, req]
    assert provider.transcript[0] is req


def test_scripted_returns_queue_head_verbatim():
    provider = ScriptedProvider(["VERDICT: FAKE\nuses ALL-CAPS"])
    assert provider.complete(PromptRequest("x")).text == "VERDICT: FAKE\nuses ALL-CAPS"


def test_scripted_exhaustion():
    with pytest.raises(ProviderRejection, match="script exhausted"):
        ScriptedProvider([]).complete(PromptRequest("x"))


def test_request_defaults_and_validation():
    req = PromptRequest("x")
    assert req.temperature == 0.0
    assert req.max_output_tokens == 512
    with pytest.raises(ValueError):
        PromptRequest("  ")
    with pytest.raises(ValueError):
        PromptRequest("x", temperature=2.5)
    with pytest.raises(ValueError):
        CompletionResult("")


def test_gateway_dispatches_temperature_zero():
    provider = ScriptedProvider(["a", "a"])
    gw = Gateway(provider)
    gw.ask("same prompt")
    gw.ask("same prompt")
    assert [r.temperature for r in provider.transcript] == [0.0, 0.0]
    assert provider.transcript[0] == provider.transcript[1]


class Flaky:
    def __init__(self, errors, reply="ok"):
        self.errors = list(errors)
        self.reply = reply
        self.attempts = 0

    def complete(self, request):
        self.attempts += 1
        if self.errors:
            raise self.errors.pop(0)
        return CompletionResult(self.reply)


def test_retry_on_transport_then_success():
    slept = []
    provider = Flaky([TransportError("down"), RateLimited("slow")])
    gw = Gateway(provider, retry=RetryPolicy(max_attempts=3, backoff_base=0.1), sleep=slept.append)
    assert gw.ask("x") == "ok"
    assert provider.attempts == 3
    assert slept == [0.1, 0.2]
    assert gw.calls == 1


def test_retry_gives_up_at_max_attempts():
    provider = Flaky([TransportError("1"), TransportError("2"), TransportError("3")])
    gw = Gateway(provider, retry=RetryPolicy(max_attempts=2), sleep=lambda s: None)
    with pytest.raises(TransportError):
        gw.ask("x")
    assert provider.attempts == 2


def test_no_retry_on_authentication():
    provider = Flaky([AuthenticationError("bad key")])
    gw = Gateway(provider, sleep=lambda s: pytest.fail("must not sleep"))
    with pytest.raises(AuthenticationError):
        gw.ask("x")
    assert provider.attempts == 1


@given(st.integers(1, 8), st.floats(0, 5), st.integers(0, 10))
def test_retry_bounded_and_backoff_nondecreasing(max_attempts, base, failures):
    provider = Flaky([TransportError("x")] * failures)
    gw = Gateway(provider, retry=RetryPolicy(max_attempts, base), sleep=lambda s: None)
    try:
        gw.ask("x")
    except TransportError:
        pass
    assert provider.attempts <= max_attempts
    assert gw.retry_delays == sorted(gw.retry_delays)


def test_budget():
    gw = Gateway(ScriptedProvider(["a", "b", "c"]), max_calls=2)
    gw.ask("1")
    gw.ask("2")
    with pytest.raises(BudgetExceeded):
        gw.ask("3")
    assert gw.fork().ask("4") == "c"


def test_script_file_roundtrip(tmp_path):
    replies = ["VERDICT: FAKE\nline two", "back\\slash", "tab\there", ""]
    path = tmp_path / "s.txt"
    dump_script(replies, path)
    assert load_script(path) == replies
    assert path.read_text().count("\n") == 4


def _http_provider(handler):
    return HTTPChatProvider("https://llm.test/v1/chat/completions", "k", client=httpx.Client(transport=httpx.MockTransport(handler)))


def test_http_provider_wire_format():
    seen = {}

    def handler(request):
        seen["body"] = request.read()
        seen["auth"] = request.headers["authorization"]
        return httpx.Response(200, json={"choices": [{"message": {"content": "hi"}, "finish_reason": "stop"}]})

    result = _http_provider(handler).complete(PromptRequest("u", system_text="s"))
    assert result.text == "hi" and not result.truncated
    import json

    body = json.loads(seen["body"])
    assert body["messages"] == [{"role": "system", "content": "s"}, {"role": "user", "content": "u"}]
    assert body["temperature"] == 0.0 and body["max_tokens"] == 512
    assert seen["auth"] == "Bearer k"


@pytest.mark.parametrize(
    "status, exc",
    [(401, AuthenticationError), (429, RateLimited), (400, ProviderRejection), (503, TransportError)],
)
def test_http_provider_error_mapping(status, exc):
    provider = _http_provider(lambda r: httpx.Response(status, text="nope"))
    with pytest.raises(exc):
        provider.complete(PromptRequest("u"))


def test_http_provider_network_error():
    def handler(request):
        raise httpx.ConnectError("refused")

    with pytest.raises(TransportError):
        _http_provider(handler).complete(PromptRequest("u"))


def test_http_truncation_flag():
    provider = _http_provider(
        lambda r: httpx.Response(200, json={"choices": [{"message": {"content": "par"}, "finish_reason": "length"}]})
    )
    assert provider.complete(PromptRequest("u")).truncated
