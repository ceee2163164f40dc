"""Command-line entry point: ``pesg <subcommand> [flags]``.

Every subcommand that writes files also writes a JSON manifest beside them
(config, seed, input and output hashes). Failures print one JSON line on
stderr and exit 1; argument errors exit 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import TrainConfig
from .evaluation import abstractness, lead3, rouge
from .inference import beam_search, detokenize, greedy_search
from .model import DecodingState
from .retrieval import ProtoIndex, build_index, retrieve, retrieve_top
from .synth import synth_corpus
from .sweep import SWEEP_FIELDS, hop_sweep
from .text import Vocabulary, build_vocab, corpus_tokens, encode_example, read_jsonl, tokenize, write_jsonl
from .training import load_trained, train
from .viz import write_csv, write_heatmap, write_matrix_csv

log = logging.getLogger("pesg")

DATA_DIR_ENV = "PESG_DATA_DIR"

# flag name -> TrainConfig field
CONFIG_FLAGS = {
    "embedding_dim": "embedding_dim", "hidden": "hidden", "vocab_size": "vocab_size",
    "batch_size": "batch_size", "keep_prob": "keep_prob", "beam": "beam", "epsilon": "epsilon",
    "eta": "eta", "hops": "hops", "max_src_len": "max_src", "max_tgt_len": "max_tgt", "lr": "lr",
    "seed": "seed", "steps": "steps", "checkpoint_every": "checkpoint_every",
    "normalize_attention": "normalize_attention",
}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# helpers --------------------------------------------------------------------

def data_path(p) -> Path:
    """Resolve an input path, falling back to $PESG_DATA_DIR for relative paths."""
    path = Path(p)
    if path.exists():
        return path
    base = os.environ.get(DATA_DIR_ENV)
    if base and not path.is_absolute() and (Path(base) / path).exists():
        return Path(base) / path
    raise CliError("missing_input", f"no such file: {p}")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, args, inputs=(), outputs=(), config: TrainConfig | None = None,
                   checkpoint=None, extra: dict | None = None) -> None:
    argv = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    manifest = {
        "command": args.command,
        "version": __version__,
        "args": {k: str(v) if isinstance(v, Path) else v for k, v in argv.items()},
        "config": config.to_dict() if config else None,
        "seed": config.seed if config else argv.get("seed"),
        "checkpoint": str(checkpoint) if checkpoint else None,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {str(p): sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def manifest_for(out) -> Path:
    out = Path(out)
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def build_config(args) -> TrainConfig:
    """Profile defaults, then the config file, then explicit flags."""
    config = TrainConfig.toy() if getattr(args, "profile", "full") == "toy" else TrainConfig()
    if getattr(args, "config", None):
        try:
            given = json.loads(data_path(args.config).read_text(encoding="utf-8"))
            TrainConfig.from_dict({**config.to_dict(), **given})
        except (ValueError, TypeError) as exc:
            raise CliError("bad_config", f"{args.config}: {exc}") from None
        config = config.replace(**given)
    changes = {field: getattr(args, flag) for flag, field in CONFIG_FLAGS.items()
               if getattr(args, flag, None) is not None}
    try:
        return config.replace(**changes)
    except ValueError as exc:
        raise CliError("bad_config", str(exc)) from None


def load_records(path) -> list[dict]:
    records = read_jsonl(path)
    if not records:
        raise CliError("empty_input", f"{path} contains no records")
    return records


def read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def parse_hops(text: str) -> list[int]:
    """'1..4' or '1,2,5'."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hop range {text!r}; use 1..4 or 1,2,3") from None


class Session:
    """A trained model with its vocabulary and prototype index, for the read-only subcommands."""

    def __init__(self, args):
        self.ckpt = data_path(args.checkpoint)
        self.params, self.config, self.step = load_trained(self.ckpt)
        self.vocab_path = data_path(args.vocab)
        self.vocab = Vocabulary.load(self.vocab_path)
        if len(self.vocab) != self.params["emb"].shape[0]:
            raise CliError("vocab_mismatch", f"vocabulary has {len(self.vocab)} entries, "
                                             f"checkpoint expects {self.params['emb'].shape[0]}")
        self.index_path = data_path(args.index)
        self.index = ProtoIndex.load(self.index_path)
        self.input_path = data_path(args.input)
        self.records = load_records(self.input_path)
        self.self_exclude = args.self_exclude

    @property
    def inputs(self) -> list[Path]:
        return [self.ckpt, self.vocab_path, self.index_path, self.input_path]

    def example(self, i: int):
        if not 0 <= i < len(self.records):
            raise CliError("bad_example", f"example {i} out of range (0..{len(self.records) - 1})")
        rec = self.records[i]
        proto = retrieve(self.index, rec["doc"], i if self.self_exclude else None)
        full = {"doc": rec["doc"], "summary": rec.get("summary", ""), "proto_doc": proto.doc,
                "proto_summary": proto.summary}
        return encode_example(full, self.vocab, self.config.max_src, self.config.max_tgt)

    def decode(self, ex, beam: int, max_len: int):
        ds = DecodingState(self.params, ex, self.config)
        if beam == 1:
            return ds, greedy_search(ds.step, ds.initial, max_len)
        return ds, beam_search(ds.step, ds.initial, beam, max_len)[0]


# subcommands ----------------------------------------------------------------

def cmd_synth_corpus(args):
    out = Path(args.out)
    write_jsonl(out, synth_corpus(args.n, args.seed))
    write_manifest(manifest_for(out), args, outputs=[out])
    print(out)


def cmd_build_vocab(args):
    corpus = data_path(args.corpus)
    vocab = build_vocab(corpus_tokens(load_records(corpus)), args.vocab_size)
    out = Path(args.out)
    vocab.save(out)
    write_manifest(manifest_for(out), args, inputs=[corpus], outputs=[out])
    print(f"{out}\t{len(vocab)} tokens")


def cmd_build_index(args):
    corpus = data_path(args.corpus)
    records = load_records(corpus)
    index = build_index(records)
    out = Path(args.out)
    index.save(out)
    outputs = [out]
    if args.prototypes:
        proto = Path(args.prototypes)
        ids = [retrieve(index, r["doc"], i).doc_id for i, r in enumerate(records)]
        proto.write_text(json.dumps(ids) + "\n", encoding="utf-8")
        outputs.append(proto)
    write_manifest(manifest_for(out), args, inputs=[corpus], outputs=outputs)
    print(f"{out}\t{len(index)} documents")


def cmd_retrieve(args):
    index_path = data_path(args.index)
    index = ProtoIndex.load(index_path)
    if (args.query is None) == (args.query_file is None):
        raise CliError("bad_args", "give exactly one of --query or --query-file")
    query = args.query if args.query is not None else data_path(args.query_file).read_text(encoding="utf-8")
    hits = retrieve_top(index, query, args.k, args.exclude_id)
    rows = [[rank, h.doc_id, repr(h.score), h.summary] for rank, h in enumerate(hits, 1)]
    for row in rows:
        print("\t".join(map(str, row)))
    if args.out:
        out = Path(args.out)
        write_csv(out, ["rank", "doc_id", "score", "summary"], rows)
        write_manifest(manifest_for(out), args, inputs=[index_path], outputs=[out])


def cmd_train(args):
    config = build_config(args)
    corpus = data_path(args.corpus)
    records = load_records(corpus)
    inputs = [corpus]
    if args.vocab:
        vocab_path = data_path(args.vocab)
        vocab = Vocabulary.load(vocab_path)
        inputs.append(vocab_path)
    else:
        vocab = build_vocab(corpus_tokens(records), config.vocab_size)
    if args.index:
        index_path = data_path(args.index)
        index = ProtoIndex.load(index_path)
        inputs.append(index_path)
    else:
        index = build_index(records)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    proto_path = out / "prototypes.json"
    if args.resume and proto_path.exists():
        proto_ids = json.loads(proto_path.read_text(encoding="utf-8"))
    else:
        proto_ids = [retrieve(index, r["doc"], i).doc_id for i, r in enumerate(records)]
        proto_path.write_text(json.dumps(proto_ids) + "\n", encoding="utf-8")
    if not args.vocab:
        vocab.save(out / "vocab.txt")
    if not args.index:
        index.save(out / "index.jsonl")
    # prototypes come from the index, which may differ from the corpus file
    examples = []
    for rec, pid in zip(records, proto_ids):
        full = dict(rec, proto_doc=index.docs[pid], proto_summary=index.summaries[pid])
        examples.append(encode_example(full, vocab, config.max_src, config.max_tgt))
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")

    def report(row):
        if row["step"] % args.log_every == 0:
            log.info("step %d  L_s/tok %.4f  L_l %.4f  L_g %.4f  |g| %.3f", row["step"], row["L_s"], row["L_l"],
                     row["L_g"], row["grad_norm"])

    resume = data_path(args.resume) if args.resume else None
    result = train(config, examples, len(vocab), out, resume, report)
    outputs = [p for p in sorted(out.iterdir()) if p.is_file() and p.name != "manifest.json"]
    outputs += result.checkpoints
    write_manifest(out / "manifest.json", args, inputs=inputs + ([resume] if resume else []), outputs=outputs,
                   config=config, checkpoint=result.checkpoints[-1] if result.checkpoints else None)
    print(result.checkpoints[-1] if result.checkpoints else out)


def cmd_generate(args):
    s = Session(args)
    beam = args.beam if args.beam is not None else s.config.beam
    max_len = args.max_len if args.max_len is not None else s.config.max_tgt
    out = Path(args.out)
    lines, traces = [], []
    for i in range(len(s.records)):
        ex = s.example(i)
        _, hyp = s.decode(ex, beam, max_len)
        lines.append(detokenize(hyp.tokens, s.vocab, ex.oov_map))
        if args.trace:
            tokens = [detokenize([t], s.vocab, ex.oov_map, eos=-1) for t in hyp.tokens]
            traces.append({"id": i, "steps": [
                {"token": tok, "gamma": float(st.gamma.data), "p_gen": float(st.p_gen.data),
                 "attention": [round(float(a), 6) for a in st.attn.data]}
                for tok, st in zip(tokens, hyp.infos)]})
    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    outputs = [out]
    if args.trace:
        trace = Path(args.trace)
        write_jsonl(trace, traces)
        outputs.append(trace)
    write_manifest(manifest_for(out), args, inputs=s.inputs, outputs=outputs, config=s.config, checkpoint=s.ckpt)


def cmd_evaluate(args):
    cand_path, ref_path = data_path(args.candidates), data_path(args.references)
    cands, refs = read_lines(cand_path), read_lines(ref_path)
    if len(cands) != len(refs):
        raise CliError("length_mismatch", f"{len(cands)} candidates vs {len(refs)} references")
    header = ["id"] + [f"{m}_{p}" for m in ("R1", "R2", "RL") for p in ("P", "R", "F1")]
    rows = []
    for i, (c, r) in enumerate(zip(cands, refs)):
        sc = rouge(c, r)
        rows.append([i] + [repr(getattr(sc[m], a)) for m in ("R1", "R2", "RL")
                           for a in ("precision", "recall", "f1")])
    mean = np.mean([[float(x) for x in row[1:]] for row in rows], axis=0) if rows else np.zeros(9)
    rows.append(["mean"] + [repr(float(x)) for x in mean])
    out = Path(args.out)
    write_csv(out, header, rows)
    write_manifest(manifest_for(out), args, inputs=[cand_path, ref_path], outputs=[out])
    print(f"R1 {mean[2]:.4f}  R2 {mean[5]:.4f}  RL {mean[8]:.4f}")


def cmd_stats(args):
    corpus = data_path(args.corpus)
    records = load_records(corpus)
    header = ["id", "coverage", "density", "compression"] + [f"novel_{n}" for n in range(1, 5)]
    if args.lead3:
        header += ["lead3_R1", "lead3_R2", "lead3_RL"]
    rows = []
    for i, rec in enumerate(records):
        st = abstractness(rec["doc"], rec["summary"])
        row = [i, st.coverage, st.density, st.compression] + [st.novel[n] for n in range(1, 5)]
        if args.lead3:
            sc = rouge(lead3(tokenize(rec["doc"])), rec["summary"])
            row += [sc["R1"].f1, sc["R2"].f1, sc["RL"].f1]
        rows.append(row)
    mean = np.mean([r[1:] for r in rows], axis=0)
    table = [[r[0]] + [repr(float(x)) for x in r[1:]] for r in rows]
    table.append(["mean"] + [repr(float(x)) for x in mean])
    out = Path(args.out)
    write_csv(out, header, table)
    write_manifest(manifest_for(out), args, inputs=[corpus], outputs=[out])
    print("  ".join(f"{h} {v:.4f}" for h, v in zip(header[1:], mean)))


def cmd_inspect(args):
    s = Session(args)
    ex = s.example(args.example)
    ds = DecodingState(s.params, ex, s.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [f"{i}:{t}" for i, t in enumerate(s.vocab.itos[j] for j in ex.proto_doc)]
    cols = [f"{i}:{t}" for i, t in enumerate(s.vocab.itos[j] for j in ex.proto_summary)]
    enc = ds.enc
    write_matrix_csv(out / "S.csv", enc.S.data, rows, cols)
    write_csv(out / "a_s.csv", ["position", "token", "a_s"],
              [[i, c.split(":", 1)[1], repr(float(v))] for i, (c, v) in enumerate(zip(cols, enc.a_s.data))])
    write_csv(out / "a_d.csv", ["position", "token", "a_d"],
              [[i, r.split(":", 1)[1], repr(float(v))] for i, (r, v) in enumerate(zip(rows, enc.a_d.data))])
    write_heatmap(out / "S.svg", enc.S.data, rows, cols, "prototype similarity S")
    outputs = [out / n for n in ("S.csv", "a_s.csv", "a_d.csv", "S.svg")]
    write_manifest(out / "manifest.json", args, inputs=s.inputs, outputs=outputs, config=s.config,
                   checkpoint=s.ckpt)
    print(out)


def cmd_inspect_gate(args):
    s = Session(args)
    ex = s.example(args.example)
    beam = args.beam if args.beam is not None else 1
    max_len = args.max_len if args.max_len is not None else s.config.max_tgt
    _, hyp = s.decode(ex, beam, max_len)
    tokens = [detokenize([t], s.vocab, ex.oov_map, eos=-1) for t in hyp.tokens]
    src = ex.doc_tokens
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, attn = [], []
    for t, (tok, st) in enumerate(zip(tokens, hyp.infos)):
        a = st.attn.data
        top = np.argsort(-a, kind="stable")[:args.top]
        rows.append([t, tok, repr(float(st.gamma.data)), repr(float(st.p_gen.data)),
                     " ".join(f"{src[j]}@{j}:{a[j]:.4f}" for j in top)])
        attn.append(a)
    write_csv(out / "gate.csv", ["step", "token", "gamma", "p_gen", "top_attention"], rows)
    labels = [f"{t}:{tok}" for t, tok in enumerate(tokens)]
    gates = np.array([[float(st.gamma.data) for st in hyp.infos], [float(st.p_gen.data) for st in hyp.infos]])
    write_heatmap(out / "gate.svg", gates, ["gamma", "p_gen"], labels, "editing gate per generated token")
    write_heatmap(out / "attention.svg", np.array(attn), labels, [f"{j}:{w}" for j, w in enumerate(src)],
                  "document attention")
    outputs = [out / n for n in ("gate.csv", "gate.svg", "attention.svg")]
    write_manifest(out / "manifest.json", args, inputs=s.inputs, outputs=outputs, config=s.config,
                   checkpoint=s.ckpt)
    print(out)


def cmd_check(args):
    s = Session(args)
    max_len = args.max_len if args.max_len is not None else s.config.max_tgt
    fields = ("tau_r_local", "tau_f_local", "tau_r_global", "tau_f_global")
    rows = []
    for i in range(len(s.records)):
        ex = s.example(i)
        ds, hyp = s.decode(ex, 1, max_len)
        v = ds.check_scores(hyp.infos[-1].d).values()
        rows.append([i] + [v[f] for f in fields])
        print("\t".join([str(i)] + [f"{v[f]:.6f}" for f in fields]))
    mean = np.mean([r[1:] for r in rows], axis=0)
    print("\t".join(["mean"] + [f"{x:.6f}" for x in mean]))
    if args.out:
        out = Path(args.out)
        table = [[r[0]] + [repr(float(x)) for x in r[1:]] for r in rows]
        write_csv(out, ["id", *fields], table + [["mean"] + [repr(float(x)) for x in mean]])
        write_manifest(manifest_for(out), args, inputs=s.inputs, outputs=[out], config=s.config,
                       checkpoint=s.ckpt)


def cmd_hop_sweep(args):
    config = build_config(args)
    corpus = data_path(args.corpus)
    records = load_records(corpus)
    vocab = None
    inputs = [corpus]
    if args.vocab:
        vocab = Vocabulary.load(data_path(args.vocab))
        inputs.append(data_path(args.vocab))
    rows = hop_sweep(records, config, args.hops_range, args.beam or 1, vocab)
    out = Path(args.out)
    write_csv(out, SWEEP_FIELDS, [r.as_row() for r in rows])
    write_manifest(manifest_for(out), args, inputs=inputs, outputs=[out], config=config)
    for r in rows:
        print(f"K={r.K}\tR1 {r.R1:.4f}\tR2 {r.R2:.4f}\tRL {r.RL:.4f}")


# parser ---------------------------------------------------------------------

def _add_config_flags(p, with_hops: bool = True):
    g = p.add_argument_group("model and optimisation (override --config)")
    g.add_argument("--config", help="JSON file of config values")
    g.add_argument("--profile", choices=("full", "toy"), default="full",
                   help="base defaults: full-size model or the small desk profile")
    g.add_argument("--embedding-dim", type=int)
    g.add_argument("--hidden", type=int)
    g.add_argument("--vocab-size", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--keep-prob", type=float)
    g.add_argument("--epsilon", type=float, help="weight of the global checker loss")
    g.add_argument("--eta", type=float, help="weight of the local checker loss")
    if with_hops:
        g.add_argument("--hops", type=int, help="polishing hops K")
    g.add_argument("--max-src-len", type=int)
    g.add_argument("--max-tgt-len", type=int)
    g.add_argument("--lr", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--steps", type=int)
    g.add_argument("--checkpoint-every", type=int)
    g.add_argument("--normalize-attention", action="store_const", const=True,
                   help="softmax the prototype attention weights instead of plain means")


def _add_session_flags(p):
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--input", required=True, help="JSONL records with a doc field")
    p.add_argument("--self-exclude", action="store_true",
                   help="input is the indexed corpus; never use record i as its own prototype")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pesg", description="Prototype-editing summary generator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth-corpus", help="write a synthetic template corpus")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth_corpus)

    p = sub.add_parser("build-vocab", help="frequency-ranked vocabulary, one token per line")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-size", type=int, default=5000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("build-index", help="TF-IDF prototype index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--prototypes", help="also write the self-excluded prototype id of every record")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("retrieve", help="top-k prototypes for a query document")
    p.add_argument("--index", required=True)
    p.add_argument("--query")
    p.add_argument("--query-file")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--exclude-id", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("train", help="train a model and write checkpoints and metrics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", help="vocabulary file (built from the corpus when omitted)")
    p.add_argument("--index", help="prototype index (built from the corpus when omitted)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--log-every", type=int, default=50)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="decode one summary per input record")
    _add_session_flags(p)
    p.add_argument("--beam", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", help="JSONL file of per-token gamma, p_gen and attention")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="ROUGE-1/2/L of line-aligned candidate and reference files")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="coverage, density, compression and novel n-grams of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lead3", action="store_true", help="also score the Lead-3 baseline")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("inspect", help="dump S, a_s and a_d for one example")
    _add_session_flags(p)
    p.add_argument("--example", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("inspect-gate", help="editing gate, p_gen and attention per generated token")
    _add_session_flags(p)
    p.add_argument("--example", type=int, default=0)
    p.add_argument("--beam", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--top", type=int, default=3, help="attention targets listed per token")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_inspect_gate)

    p = sub.add_parser("check", help="fact-checker scores of greedy decodes")
    _add_session_flags(p)
    p.add_argument("--max-len", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("hop-sweep", help="train and score one model per hop count")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab")
    p.add_argument("--hops", dest="hops_range", type=parse_hops, default=parse_hops("1..4"))
    p.add_argument("--beam", type=int)
    p.add_argument("--out", required=True)
    _add_config_flags(p, with_hops=False)
    p.set_defaults(func=cmd_hop_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CliError as exc:
        return _fail(exc.kind, str(exc))
    except (OSError, ValueError, IndexError, KeyError, FloatingPointError, RuntimeError) as exc:
        return _fail(type(exc).__name__, str(exc))
    return 0


def _fail(kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": " ".join(message.split())}), file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
