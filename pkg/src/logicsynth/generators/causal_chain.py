"""Causal chain extraction from necessity and timing conditions.

A link X -> Y is established only when both conditions are stated:
"without X, Y is unlikely" (necessity) and "after X, Y occurs shortly"
(temporal). Single conditions and distractor events are noise. The answer is
the event-ID sequence along the established links, which by construction
form one simple path.
"""

from __future__ import annotations

import string
from typing import Any, Mapping

from ..errors import MultipleSolutions, NoSolution, TooLarge
from .base import Family, GroundTruth, sequence_truth
from .lexicon import EVENTS

FORMS = ("necessity", "temporal")
ORACLE_MAX_EVENTS = 20


def _established(conditions) -> set[tuple[str, str]]:
    seen = {(form, x, y) for form, x, y in conditions}
    return {(x, y) for form, x, y in seen if form == "necessity" and ("temporal", x, y) in seen}


class CausalChain(Family):
    family_id = "causal_chain"
    arity = 2

    def sample(self, level_params: Mapping[str, Any], rng) -> dict[str, Any]:
        length = max(2, int(level_params["chain_length"]))
        n_distract = max(0, int(level_params.get("distractors", 0)))
        n_noise = max(0, int(level_params.get("noise_conditions", 0)))
        total = min(length + n_distract, len(EVENTS["en"]))
        n_distract = total - length
        pool = rng.sample(range(len(EVENTS["en"])), total)
        ids: list[str] = []
        while len(ids) < total:
            cand = f"{rng.choice(string.ascii_uppercase)}{rng.randint(1, 30)}"
            if cand not in ids:
                ids.append(cand)
        chain = ids[:length]
        conditions = []
        for x, y in zip(chain, chain[1:]):
            conditions += [["necessity", x, y], ["temporal", x, y]]
        links = set(zip(chain, chain[1:]))
        present = {tuple(c) for c in conditions}
        attempts = 0
        while n_noise and attempts < 50 * n_noise:
            attempts += 1
            u, v = rng.sample(ids, 2)
            form = rng.choice(FORMS)
            other = FORMS[1 - FORMS.index(form)]
            if (u, v) in links or (form, u, v) in present or (other, u, v) in present:
                continue
            conditions.append([form, u, v])
            present.add((form, u, v))
            n_noise -= 1
        rng.shuffle(conditions)
        events = [[eid, pool[i]] for i, eid in enumerate(ids)]
        rng.shuffle(events)
        return {"events": events, "conditions": conditions}

    def solve(self, payload: Mapping[str, Any]) -> GroundTruth:
        """Kahn topological order over established links, which must form a path."""
        links = _established(payload["conditions"])
        if not links:
            raise NoSolution("no established causal link")
        succ: dict[str, list[str]] = {}
        indeg: dict[str, int] = {}
        for x, y in sorted(links):
            succ.setdefault(x, []).append(y)
            indeg[y] = indeg.get(y, 0) + 1
            indeg.setdefault(x, 0)
        if any(len(v) > 1 for v in succ.values()) or any(d > 1 for d in indeg.values()):
            raise MultipleSolutions("established links branch")
        ready = [n for n, d in indeg.items() if d == 0]
        if len(ready) > 1:
            raise MultipleSolutions("established links form several chains")
        order = []
        while ready:
            node = ready.pop()
            order.append(node)
            for nxt in succ.get(node, []):
                indeg[nxt] -= 1
                if indeg[nxt] == 0:
                    ready.append(nxt)
        if len(order) != len(indeg):
            raise NoSolution("established links contain a cycle")
        return sequence_truth(order)

    def oracle_tractable(self, payload) -> bool:
        return len(payload["events"]) <= ORACLE_MAX_EVENTS

    def oracle(self, payload: Mapping[str, Any]) -> GroundTruth:
        """Enumerate every simple event sequence whose consecutive pairs are
        exactly the set of doubly-supported pairs."""
        if not self.oracle_tractable(payload):
            raise TooLarge(f"oracle handles at most {ORACLE_MAX_EVENTS} events")
        event_ids = [eid for eid, _ in payload["events"]]
        necessity = {(x, y) for form, x, y in payload["conditions"] if form == "necessity"}
        temporal = {(x, y) for form, x, y in payload["conditions"] if form == "temporal"}
        wanted = necessity & temporal
        found = []

        def extend(seq: list[str], pairs: frozenset):
            if len(seq) >= 2 and pairs == wanted:
                found.append(list(seq))
            for nxt in event_ids:
                if nxt not in seq and (seq[-1], nxt) in wanted:
                    extend(seq + [nxt], pairs | {(seq[-1], nxt)})

        for start in event_ids:
            extend([start], frozenset())
        if not found:
            raise NoSolution("no sequence covers the established links")
        if len(found) > 1:
            raise MultipleSolutions(f"{len(found)} sequences cover the established links")
        return sequence_truth(found[0])

    def fills(self, payload: Mapping[str, Any], language: str) -> list[str]:
        names = {eid: EVENTS[language][idx] for eid, idx in payload["events"]}
        colon = ": " if language == "en" else "："
        events = "\n".join(f"{eid}{colon}{names[eid]}" for eid, _ in payload["events"])
        lines = []
        for n, (form, x, y) in enumerate(payload["conditions"], 1):
            a, b = names[x], names[y]
            if language == "en":
                if form == "necessity":
                    text = f'Without "{a}", "{b}" is unlikely to occur.'
                else:
                    text = f'Typically, "{b}" occurs shortly after "{a}".'
                lines.append(f"({n}) {text}")
            else:
                if form == "necessity":
                    text = f"如果没有“{a}”，“{b}”不太可能发生。"
                else:
                    text = f"通常，“{a}”发生后不久会出现“{b}”。"
                lines.append(f"（{n}）{text}")
        return [events, "\n".join(lines)]
