import pytest

from pesg.config import TrainConfig
from pesg.retrieval import build_index
from pesg.synth import synth_corpus
from pesg.text import build_vocab, corpus_tokens
from pesg.training import encode_corpus


@pytest.fixture(scope="session")
def tiny():
    """Six synthetic records on a very small model."""
    records = synth_corpus(6, 3)
    vocab = build_vocab(corpus_tokens(records), 60)
    config = TrainConfig.toy(embedding_dim=6, hidden=4, vocab_size=60, batch_size=2, max_src=30, max_tgt=20,
                             steps=4, checkpoint_every=2, hops=2)
    examples = encode_corpus(records, vocab, config, build_index(records))
    return records, vocab, config, examples


_criteria: dict[int, tuple[str, str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    notes = [v for k, v in item.user_properties if k == "note"]
    prev = _criteria.get(n)
    status = "FAIL" if rep.failed or (prev and prev[0] == "FAIL") else "PASS"
    _criteria[n] = (status, title, (prev[2] if prev else []) + notes)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, title, notes = _criteria[n]
        line = f"[{status}] {n:>2}. {title}"
        if notes:
            line += "  (" + "; ".join(notes) + ")"
        terminalreporter.write_line(line)
