#!/usr/bin/env python3
"""Write a synthetic JSONL dataset (and optionally its debate
transcripts) for exercising the pipeline without credentials."""

import argparse
from pathlib import Path

from veridebate.evaluation import write_dataset_jsonl
from veridebate.synthetic import make_synthetic_corpus, write_transcripts


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--train", type=int, default=40)
    parser.add_argument("--val", type=int, default=10)
    parser.add_argument("--test", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--task", choices=["stance", "role"], default="stance")
    parser.add_argument(
        "--transcripts-dir",
        help="also write the planted-signal transcripts here (otherwise the "
        "pipeline will generate debates through its gateway)",
    )
    args = parser.parse_args()

    corpus = make_synthetic_corpus(
        n_train=args.train, n_val=args.val, n_test=args.test,
        seed=args.seed, task=args.task,
    )
    write_dataset_jsonl(corpus.dataset, args.out)
    print(f"wrote {len(corpus.dataset)} items -> {args.out}")
    if args.transcripts_dir:
        write_transcripts(corpus, Path(args.transcripts_dir))
        print(f"wrote {len(corpus.logs)} transcripts -> {args.transcripts_dir}")


if __name__ == "__main__":
    main()
