import json
import math
import time

import httpx
import pytest

from logicsynth.errors import AuthMissing, Timeout, TransportError
from logicsynth.instances import build_instance
from logicsynth.model_adapter import (
    EndpointConfig, HttpModel, MockModel, MockModelConfig, logistic, mock_for, near_miss,
)
from logicsynth.rewards import extract_answer, score
from logicsynth.seeding import derive_seed


def test_logistic_midpoint_and_inverse():
    assert logistic(0.0) == 0.5
    cfg = MockModelConfig(skill=6, slope=0.5, complexity_key="n")
    assert cfg.success_probability(6) == 0.5
    for p in (0.1, 0.3, 0.7, 0.95):
        assert cfg.success_probability(cfg.complexity_for(p)) == pytest.approx(p)
    with pytest.raises(ValueError):
        MockModelConfig(skill=1, slope=0, complexity_key="n")


def _rate(descriptor, model, level, n, lang="en"):
    hits = 0
    for i in range(n):
        inst = build_instance(descriptor, level, derive_seed(77, level, i), lang)
        reply = model.answer(inst.question, inst)
        parsed = extract_answer(reply, inst.answer_kind, lang, lenient=True).parsed
        hits += score(parsed, inst.truth, inst.scoring_method, lang) == 1.0
    return hits / n


def test_high_skill_is_nearly_perfect(registry):
    d = registry["maze_paths"]
    assert _rate(d, mock_for(d, high_skill=True), 5, 1000) >= 0.99


def test_rate_converges_to_p(registry):
    d = registry["seal_decode"]
    model = mock_for(d)
    level = 5
    p = model.config.success_probability(d.ladder.params(level)["length"])
    n = 1000
    assert abs(_rate(d, model, level, n) - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_same_instance_same_text(registry):
    d = registry["truth_teller"]
    model = mock_for(d)
    inst = build_instance(d, 6, 5, "zh")
    assert model.answer(inst.question, inst) == model.answer(inst.question, inst)


def test_wrong_answers_are_near_misses(registry):
    for family in ("truth_teller", "causal_chain", "seal_decode", "rect_paint"):
        d = registry[family]
        for i in range(30):
            inst = build_instance(d, 6, i, "en")
            text = near_miss(inst.truth, "en", (i + 0.5) / 30)
            parsed = extract_answer(f"<answer>{text}</answer>", inst.answer_kind).parsed
            s = score(parsed, inst.truth, inst.scoring_method, "en")
            assert parsed is not None and s < 1.0


def test_format_failures_drop_tags(registry):
    d = registry["seal_decode"]
    model = MockModel(MockModelConfig(skill=1000, slope=1, complexity_key="length", format_fail_rate=1.0))
    inst = build_instance(d, 3, 1, "en")
    reply = model.answer(inst.question, inst)
    assert "<answer>" not in reply
    assert extract_answer(reply, inst.answer_kind, "en", lenient=True).parsed == float(inst.truth.value)


def test_incomplete_question_is_refused(registry):
    d = registry["seal_decode"]
    inst = build_instance(d, 3, 1, "en")
    reply = mock_for(d, high_skill=True).answer("Decode [Slot 1] please", inst)
    assert "<answer>" not in reply


def _chat(content="<answer>7</answer>"):
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}


def test_http_round_trip(monkeypatch):
    seen = {}

    def handler(request):
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=_chat())

    monkeypatch.setenv("LS_TOKEN", "secret")
    model = HttpModel(EndpointConfig("http://host/v1", "m1", token_env="LS_TOKEN", temperature=0.2),
                      transport=httpx.MockTransport(handler))
    assert model.answer("What?") == "<answer>7</answer>"
    assert seen["url"] == "http://host/v1/chat/completions"
    assert seen["auth"] == "Bearer secret"
    assert seen["body"]["model"] == "m1" and seen["body"]["temperature"] == 0.2
    assert seen["body"]["messages"] == [{"role": "user", "content": "What?"}]


def test_http_retries_then_fails():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503)

    model = HttpModel(EndpointConfig("http://host", "m", max_retries=2), transport=httpx.MockTransport(handler))
    with pytest.raises(TransportError):
        model.answer("q")
    assert len(calls) == 3


def test_http_recovers_after_transient_error():
    responses = iter([httpx.Response(500), httpx.Response(200, json=_chat("ok"))])
    model = HttpModel(EndpointConfig("http://host", "m", max_retries=1),
                      transport=httpx.MockTransport(lambda r: next(responses)))
    assert model.answer("q") == "ok"


def test_http_auth_errors(monkeypatch):
    monkeypatch.delenv("LS_MISSING", raising=False)
    model = HttpModel(EndpointConfig("http://host", "m", token_env="LS_MISSING"),
                      transport=httpx.MockTransport(lambda r: httpx.Response(200, json=_chat())))
    with pytest.raises(AuthMissing):
        model.answer("q")
    rejected = HttpModel(EndpointConfig("http://host", "m"),
                         transport=httpx.MockTransport(lambda r: httpx.Response(401)))
    with pytest.raises(AuthMissing):
        rejected.answer("q")


def test_http_timeout_bound():
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    cfg = EndpointConfig("http://host", "m", timeout=0.05, max_retries=2)
    model = HttpModel(cfg, transport=httpx.MockTransport(handler))
    started = time.monotonic()
    with pytest.raises(Timeout):
        model.answer("q")
    assert time.monotonic() - started <= cfg.timeout * (cfg.max_retries + 1) + 0.5


def test_endpoint_validation():
    with pytest.raises(ValueError):
        EndpointConfig("http://host", "m", timeout=0)
    with pytest.raises(ValueError):
        EndpointConfig("http://host", "m", max_retries=-1)
