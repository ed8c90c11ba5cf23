"""Command line: render one figure (or all) from an experiment manifest."""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt

from .render import build_figure
from .specs import FigureDataError, load_manifest, spec_from_manifest


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="spatialepi-figures",
                                description="render publication-style figures from "
                                            "spatialepi experiment CSVs")
    p.add_argument("manifest", help="experiment manifest CSV (e.g. out/fig3_manifest.csv)")
    p.add_argument("--figure", default=None,
                   help="figure id to render (default: every figure in the manifest)")
    p.add_argument("--out", default=None, help="output directory (default: beside the manifest)")
    p.add_argument("--format", default="png", choices=("png", "svg", "pdf"))
    args = p.parse_args(argv)

    try:
        rows = load_manifest(args.manifest)
        figures = [args.figure] if args.figure else sorted({r["figure"] for r in rows})
        for figure in figures:
            spec = spec_from_manifest(args.manifest, figure, output_dir=args.out,
                                      image_format=args.format)
            fig, info = build_figure(spec)
            plt.close(fig)
            print(f"wrote {spec.output_path} "
                  f"({info['n_series']} series, {info['n_hlines']} rule lines"
                  + (f", {sum(info['scatter_points'])} agents" if info["scatter_points"] else "")
                  + ")")
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
