"""Command-line client for the design service.

Commands run against an in-process app instance by default; pass --server to
talk to a remote deployment instead. Artifacts (CSV, JSON) are written under
--out exactly as the engine produced them.
"""

import argparse
import asyncio
import json
import os
import sys
from dataclasses import asdict, replace

import httpx

from .harness import REPRODUCE_TARGETS, ConfigError, SystemConfig, config_from_yaml


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lowcoh",
        description="Low-coherence codebook design and channel-estimation runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML config file (SystemConfig field names)")
        p.add_argument("--server", help="base URL of a running service; default in-process")
        p.add_argument("--out", default="artifacts", help="output directory")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--workers", type=int, help="worker processes (default: all cores, "
                       "capped by LOWCOH_MAX_WORKERS)")

    p = sub.add_parser("design", help="design a codebook and report its coherence")
    common(p)
    p.add_argument("--nt", type=int, help="transmit array size")
    p.add_argument("--lt", type=int, help="beams per training frame")
    p.add_argument("--mx", type=int, help="pilots per frame")

    p = sub.add_parser("coherence-dist", help="coherence of random orderings vs the design")
    common(p)
    p.add_argument("--mx", type=int, help="pilots per frame")
    p.add_argument("--draws", type=int, default=20000, help="random permutations to draw")

    p = sub.add_parser("nmse", help="Monte-Carlo NMSE sweep")
    common(p)
    p.add_argument("--axis", choices=("snr", "m_x", "n_p"), default="snr")
    p.add_argument("--mx", type=int, help="pilots per frame")
    p.add_argument("--np", dest="n_p", type=int, help="number of channel paths")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per cell")
    p.add_argument("--snr", type=float, nargs="+", help="SNR grid in dB")

    p = sub.add_parser("reproduce", help="write the artifact set for one target")
    common(p)
    p.add_argument("target", choices=REPRODUCE_TARGETS)
    p.add_argument("--trials", type=int, help="Monte-Carlo trials per cell")
    p.add_argument("--draws", type=int, default=20000, help="permutation draws")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _load_config(args):
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        config = config_from_yaml(args.config)
    else:
        config = SystemConfig()
    overrides = {}
    for attr, field in (
        ("nt", "n_t"),
        ("lt", "l_t"),
        ("mx", "m_x"),
        ("n_p", "n_p"),
        ("seed", "master_seed"),
        ("trials", "trials"),
    ):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[field] = value
    snr = getattr(args, "snr", None)
    if snr is not None:
        overrides["snr_db"] = tuple(snr)
    if overrides:
        config = replace(config, **overrides)
    return config


def _post(args, path, payload):
    async def go():
        if args.server:
            async with httpx.AsyncClient(base_url=args.server, timeout=None) as client:
                return await client.post(path, json=payload)
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://lowcoh.internal", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    response = asyncio.run(go())
    if response.status_code != 200:
        raise RuntimeError(f"request failed ({response.status_code}): {response.text}")
    return response.json()


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _cmd_design(args):
    config = _load_config(args)
    report = _post(args, "/design", {"config": asdict(config), "workers": args.workers})
    print(
        f"coherence {report['coherence']:.6f} "
        f"(n_t={report['n_t']}, l_t={report['l_t']}, m_x={report['m_x']})"
    )
    print(f"pilot columns: {report['pilot_columns']}")
    print(f"ordering: {report['ordering']}")
    if args.out:
        path = _write(
            args.out,
            f"design_mx{report['m_x']}.json",
            json.dumps(report, indent=2, sort_keys=True) + "\n",
        )
        print(f"wrote {path}")
    return 0


def _cmd_coherence_dist(args):
    config = _load_config(args)
    result = _post(
        args,
        "/coherence-dist",
        {"config": asdict(config), "draws": args.draws, "workers": args.workers},
    )
    print(
        f"m_x={result['m_x']}: proposed {result['proposed']:.6f}, "
        f"random mean {result['mean']:.6f} "
        f"(min {result['min']:.6f}, max {result['max']:.6f}, {result['draws']} draws)"
    )
    path = _write(args.out, f"coherence_mx{result['m_x']}.csv", result["csv"])
    print(f"wrote {path}")
    return 0


def _cmd_nmse(args):
    config = _load_config(args)
    result = _post(
        args,
        "/nmse",
        {"config": asdict(config), "axis": args.axis, "workers": args.workers},
    )
    for row in result["rows"]:
        print(
            f"{row['axis']}={row['value']:g} {row['codebook']}: "
            f"{row['nmse_db']:.2f} dB (M={row['m']}, {row['trials']} trials)"
        )
    path = _write(args.out, f"nmse_{args.axis}.csv", result["csv"])
    print(f"wrote {path}")
    return 0


def _cmd_reproduce(args):
    config = _load_config(args)
    result = _post(
        args,
        "/reproduce",
        {
            "config": asdict(config),
            "target": args.target,
            "draws": args.draws,
            "workers": args.workers,
        },
    )
    for name in sorted(result["files"]):
        path = _write(args.out, name, result["files"][name])
        print(f"wrote {path}")
    return 0


def _cmd_serve(args):
    import uvicorn

    uvicorn.run("lowcoh.service:app", host=args.host, port=args.port)
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "design": _cmd_design,
        "coherence-dist": _cmd_coherence_dist,
        "nmse": _cmd_nmse,
        "reproduce": _cmd_reproduce,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (httpx.HTTPError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
