"""``apx`` command line: a thin client of the experiment service.

    apx list
    apx serve [--host H] [--port P]
    apx <experiment> [--config FILE] [--set key=value]... [--out DIR]
                     [--jobs N] [--server URL]

By default the client talks to an in-process instance of the FastAPI app
(no network); ``--server`` points it at a remote instance instead.  The
``APX_OUT`` environment variable overrides the output directory.  Sweeps
are expressed as comma lists in ``--set`` (cartesian product) and run in
``--jobs`` worker threads with disjoint per-run output directories.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import httpx


def _make_client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    return httpx.Client(transport=transport, base_url="http://apx.local",
                        timeout=600.0)


def _parse_set(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise SystemExit("config file must hold a JSON object of parameters")
    return {str(k): v for k, v in data.get("params", data).items()}


def _expand_sweep(params: dict) -> list:
    """Comma lists in string values become a cartesian sweep."""
    keys, options = [], []
    for key, value in params.items():
        if isinstance(value, str) and "," in value:
            keys.append(key)
            options.append([v.strip() for v in value.split(",") if v.strip()])
    if not keys:
        return [params]
    combos = []
    for values in itertools.product(*options):
        combo = dict(params)
        combo.update(dict(zip(keys, values)))
        combos.append(combo)
    return combos


def _run_one(client: httpx.Client, name: str, params: dict, outdir: Path):
    response = client.post(f"/experiments/{name}/run", json={"params": params})
    if response.status_code in (404, 422):
        return 2, response.json().get("detail", response.text), None
    if response.status_code != 200:
        detail = {}
        try:
            detail = response.json().get("detail", {})
        except Exception:
            pass
        if isinstance(detail, dict) and detail.get("code") == "numerical-failure":
            return 3, detail.get("message", "numerical failure"), None
        return 3, f"server error {response.status_code}: {response.text}", None
    body = response.json()
    outdir.mkdir(parents=True, exist_ok=True)
    for artifact in body["files"]:
        (outdir / artifact["name"]).write_text(artifact["text"], encoding="utf-8")
    summary = {"experiment": body["experiment"], "params": body["params"],
               "metrics": body["metrics"]}
    (outdir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0, None, summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="apx", description="perturbation-method experiment runner")
    parser.add_argument("experiment", help="experiment name, 'list' or 'serve'")
    parser.add_argument("--config", help="JSON file with a params object")
    parser.add_argument("--set", dest="sets", action="append", metavar="KEY=VALUE",
                        help="override a parameter (repeatable; comma lists sweep)")
    parser.add_argument("--out", default="apx-out", help="output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker threads for parameter sweeps")
    parser.add_argument("--server", help="base URL of a running service "
                                         "(default: in-process)")
    parser.add_argument("--host", default="127.0.0.1", help="serve: bind host")
    parser.add_argument("--port", type=int, default=8000, help="serve: bind port")
    args = parser.parse_args(argv)

    if args.experiment == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.experiment == "list":
        with _make_client(args.server) as client:
            response = client.get("/experiments")
            for item in response.json()["experiments"]:
                print(f"{item['name']:18s} {item['description']}")
        return 0

    params = _load_config(args.config)
    params.update(_parse_set(args.sets))
    outdir = Path(os.environ.get("APX_OUT") or args.out)
    combos = _expand_sweep(params)

    exit_code = 0
    with _make_client(args.server) as client:
        if len(combos) == 1:
            code, err, summary = _run_one(client, args.experiment, combos[0], outdir)
            if code:
                print(f"error: {err}", file=sys.stderr)
                return code
            print(f"{args.experiment}: wrote {outdir}/summary.json")
            for key, value in sorted(summary["metrics"].items()):
                print(f"  {key} = {value}")
            return 0

        def work(pair):
            index, combo = pair
            sub = outdir / f"{args.experiment}-{index:03d}"
            return _run_one(client, args.experiment, combo, sub)

        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            for code, err, _ in pool.map(work, enumerate(combos)):
                if code:
                    exit_code = max(exit_code, code)
                    print(f"error: {err}", file=sys.stderr)
        print(f"{args.experiment}: {len(combos)} runs under {outdir}")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
