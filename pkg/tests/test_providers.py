import json
import socket

import httpx
import pytest

from umlinst.errors import ProviderError
from umlinst.generation import (
    ChatSession, Exchange, HttpChatProvider, ProviderConfig, ReplayProvider, make_provider, provider_send,
    read_transcript, write_transcript,
)

from goldens import bot, sys, user

TOKEN_ENV = "UMLINST_TEST_TOKEN"


def http_config(**overrides):
    base = dict(kind="http-chat", endpoint="http://llm.invalid/v1/chat/completions", model_name="m",
                auth_env=TOKEN_ENV, max_retries=2, request_timeout=5)
    base.update(overrides)
    return ProviderConfig(**base)


def completion(text):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def test_session_is_append_only_and_records_exchanges():
    session = ChatSession("S")
    assert session.add_user("hi") == 1
    provider = ReplayProvider([Exchange([sys("S"), user("hi")], "hello")])
    assert provider_send(provider, session) == "hello"
    assert session.messages == [sys("S"), user("hi"), bot("hello")]
    assert session.exchanges == [Exchange([sys("S"), user("hi")], "hello")]


def test_replay_ordered_answers_and_exhausts():
    records = [Exchange([user("a")], "A"), Exchange([user("b")], "B")]
    provider = ReplayProvider(records)
    assert provider.complete([user("a")]) == "A"
    assert provider.complete([user("b")]) == "B"
    with pytest.raises(ProviderError) as info:
        provider.complete([user("c")])
    assert info.value.kind == "transcript-exhausted"


def test_replay_mismatch_names_the_message_index():
    provider = ReplayProvider([Exchange([sys("S"), user("a"), bot("x"), user("b")], "B")])
    with pytest.raises(ProviderError, match="at message index 2") as info:
        provider.complete([sys("S"), user("a"), bot("y"), user("b")])
    assert info.value.kind == "transcript-mismatch"


def test_replay_ordered_rejects_out_of_order():
    provider = ReplayProvider([Exchange([user("a")], "A"), Exchange([user("b")], "B")])
    with pytest.raises(ProviderError) as info:
        provider.complete([user("b")])
    assert info.value.kind == "transcript-mismatch"


def test_replay_content_match_tolerates_reordering():
    provider = ReplayProvider([Exchange([user("a")], "A"), Exchange([user("b")], "B"),
                               Exchange([user("a")], "A2")], content_match=True)
    assert provider.complete([user("b")]) == "B"
    assert provider.complete([user("a")]) == "A"
    assert provider.complete([user("a")]) == "A2"
    assert provider.remaining == 0
    with pytest.raises(ProviderError) as info:
        provider.complete([user("a")])
    assert info.value.kind == "transcript-exhausted"


def test_transcript_round_trip(tmp_path):
    a, b = ChatSession("S"), ChatSession(None)
    a.add_user("q1")
    provider_send(ReplayProvider([Exchange([sys("S"), user("q1")], "r1")]), a)
    b.add_user("q2 ünï")
    provider_send(ReplayProvider([Exchange([user("q2 ünï")], "r2")]), b)
    path = tmp_path / "t" / "run.jsonl"
    write_transcript(path, [a, b])
    assert read_transcript(path) == a.exchanges + b.exchanges
    assert json.loads(path.read_text(encoding="utf-8").splitlines()[1])["response"] == "r2"


def test_malformed_transcript(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"request_messages": []}\n')
    with pytest.raises(ProviderError, match="bad.jsonl:1") as info:
        read_transcript(path)
    assert info.value.kind == "config"


def test_missing_transcript_is_a_config_error(tmp_path):
    with pytest.raises(ProviderError) as info:
        make_provider(ProviderConfig("replay", transcript_path=str(tmp_path / "none.jsonl")))
    assert info.value.kind == "config"


@pytest.mark.parametrize("config", [
    ProviderConfig("carrier-pigeon"),
    ProviderConfig("http-chat", model_name="m"),
    ProviderConfig("replay"),
    ProviderConfig("replay", transcript_path="x", max_retries=-1),
])
def test_config_validation(config):
    with pytest.raises(ProviderError) as info:
        config.validate()
    assert info.value.kind == "config"


def test_missing_token_fails_before_any_request(monkeypatch):
    monkeypatch.delenv(TOKEN_ENV, raising=False)
    client = httpx.Client(transport=httpx.MockTransport(lambda r: pytest.fail("no request expected")))
    with pytest.raises(ProviderError, match=TOKEN_ENV) as info:
        HttpChatProvider(http_config(), client=client)
    assert info.value.kind == "config"


def test_http_sends_bearer_token_from_environment(monkeypatch):
    monkeypatch.setenv(TOKEN_ENV, "s3cret")
    seen = []

    def handler(request):
        seen.append(request)
        return completion("ok")

    provider = HttpChatProvider(http_config(), client=httpx.Client(transport=httpx.MockTransport(handler)))
    assert provider.complete([user("hi")]) == "ok"
    assert seen[0].headers["Authorization"] == "Bearer s3cret"
    assert json.loads(seen[0].content) == {"model": "m", "messages": [user("hi")]}


def test_http_retries_transient_status_then_succeeds(monkeypatch):
    monkeypatch.setenv(TOKEN_ENV, "t")
    replies = iter([httpx.Response(503), httpx.Response(429), completion("fine")])
    sleeps = []
    provider = HttpChatProvider(http_config(), sleep=sleeps.append,
                                client=httpx.Client(transport=httpx.MockTransport(lambda r: next(replies))))
    assert provider.complete([user("x")]) == "fine"
    assert sleeps == [0.5, 1.0]


def test_http_gives_up_after_retries(monkeypatch):
    monkeypatch.setenv(TOKEN_ENV, "t")
    calls = []

    def handler(request):
        calls.append(request)
        raise httpx.ConnectError("refused", request=request)

    provider = HttpChatProvider(http_config(max_retries=3), sleep=lambda s: None,
                                client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(ProviderError) as info:
        provider.complete([user("x")])
    assert info.value.kind == "timeout" and len(calls) == 4


def test_http_permanent_status_is_not_retried(monkeypatch):
    monkeypatch.setenv(TOKEN_ENV, "t")
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(401, text="bad key")

    provider = HttpChatProvider(http_config(), sleep=lambda s: None,
                                client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(ProviderError, match="401") as info:
        provider.complete([user("x")])
    assert info.value.kind == "http-status" and len(calls) == 1


def test_http_malformed_body(monkeypatch):
    monkeypatch.setenv(TOKEN_ENV, "t")
    provider = HttpChatProvider(http_config(), client=httpx.Client(
        transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"choices": []}))))
    with pytest.raises(ProviderError, match="malformed"):
        provider.complete([user("x")])


def test_unreachable_endpoint_over_real_socket(monkeypatch):
    # a port that was just bound and released on loopback refuses connections
    monkeypatch.setenv(TOKEN_ENV, "t")
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    provider = HttpChatProvider(http_config(endpoint=f"http://127.0.0.1:{port}/v1", max_retries=1,
                                            request_timeout=2), sleep=lambda s: None)
    with pytest.raises(ProviderError) as info:
        provider.complete([user("x")])
    assert info.value.kind == "timeout"
    provider.close()
