"""Deterministic synthetic corpus of patternized "judgment" summaries.

Each case type pairs a document template with a summary template. Slots in
braces are facts drawn per record and shared between document and summary;
anonymisation tags stand in for names, dates and amounts. Summaries of one
case type differ only in their facts, so pattern words and facts are
separable by construction.
"""

from __future__ import annotations

import random

SLOTS = {
    "item": ["bicycle", "phone", "laptop", "necklace", "wallet", "camera", "scooter", "watch"],
    "place": ["market", "school", "hotel", "warehouse", "station", "hospital", "shop", "garage"],
    "city": ["hefei", "anqing", "wuhu", "bengbu", "huainan", "tongling"],
    "agent": ["police", "guards", "neighbours", "patrols"],
    "weapon": ["sticks", "knives", "bricks", "bottles", "pipes"],
    "victim": ["waiter", "driver", "student", "farmer", "clerk"],
    "crime": ["robbery", "theft", "assault", "fraud", "bribery"],
    "prison": ["yicheng", "baohe", "luyang", "shushan"],
    "deed": ["studying", "labour", "volunteering", "training", "teaching"],
    "role": ["banker", "doctor", "lawyer", "officer", "broker", "agent"],
    "method": ["loans", "lotteries", "investments", "tickets", "insurance"],
    "use": ["gambling", "travel", "cars", "debts"],
    "vehicle": ["truck", "van", "car", "motorcycle", "bus"],
    "road": ["bridges", "highways", "avenues", "tunnels"],
}

CASES = [
    (
        "the procuratorate charged that on DATE defendant PERS stole a {item} from a {place} in {city} . "
        "the {item} was worth MONEY . PERS was caught by {agent} and confessed .",
        "the court held that defendant PERS stole a {item} from a {place} , the amount was large , "
        "and the crime of theft is established . PERS is sentenced to YEARS in prison .",
    ),
    (
        "on DATE defendant PERS and NUM others fought at a {place} in {city} with {weapon} . "
        "a {victim} was injured . PERS surrendered to {agent} .",
        "the court held that defendant PERS gathered people to fight with {weapon} at a {place} , "
        "and the crime of affray is established . PERS is sentenced to YEARS in prison .",
    ),
    (
        "PERS was sentenced to YEARS for {crime} . the {prison} prison proposed a commutation on DATE . "
        "PERS received NUM awards for {deed} during the sentence .",
        "the court held that criminal PERS showed repentance by {deed} during the sentence "
        "and meets the conditions for commutation . the sentence of PERS is reduced by MONTHS .",
    ),
    (
        "from DATE defendant PERS posed as a {role} and cheated NUM victims in {city} of MONEY "
        "through {method} . the money was spent on {use} .",
        "the court held that defendant PERS posed as a {role} and cheated others of MONEY through {method} , "
        "and the crime of fraud is established . PERS is sentenced to YEARS and fined MONEY .",
    ),
    (
        "on DATE defendant PERS drove a {vehicle} after drinking on {road} in {city} . "
        "the blood alcohol was NUM mg . PERS was stopped by {agent} .",
        "the court held that defendant PERS drove a {vehicle} while drunk on {road} , "
        "and the crime of dangerous driving is established . PERS is sentenced to MONTHS of detention .",
    ),
]

DISTRACTORS = [
    "the defendant has no prior record .",
    "the victim asked for compensation .",
    "the trial was held in public .",
    "the evidence was examined in court .",
]


def synth_corpus(n: int, seed: int = 0) -> list[dict]:
    """Return ``n`` records ``{"doc", "summary"}``; identical for identical seeds."""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        doc_t, sum_t = CASES[i % len(CASES)]
        facts = {k: rng.choice(v) for k, v in SLOTS.items()}
        doc = doc_t.format(**facts)
        extra = rng.sample(DISTRACTORS, rng.randint(0, 2))
        if extra:
            doc = doc + " " + " ".join(extra)
        records.append({"doc": doc, "summary": sum_t.format(**facts)})
    return records
