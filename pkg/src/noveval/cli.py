"""Command-line client for the benchmark service.

Every command goes through the HTTP API: against a remote server when
``--server`` (or NOVEVAL_SERVER) is set, otherwise against the FastAPI app
mounted in-process, so offline use needs no running daemon. The CLI itself
only reads local input files, writes canonical output files and maps error
slugs onto the stable exit codes (0 ok, 2 usage, 3 data mismatch, 4 bad
file format). Diagnostics go to stderr; tables go to stdout.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys
from pathlib import Path

import click
import httpx

from . import __version__, metrics, splits
from .errors import NovevalError

EXIT_USAGE = 2
EXIT_MISMATCH = 3
EXIT_FORMAT = 4

_EXIT_BY_SLUG = {
    "invalid-argument": EXIT_USAGE,
    "not-found": EXIT_USAGE,
    "label-mismatch": EXIT_MISMATCH,
    "dataset-mismatch": EXIT_MISMATCH,
    "undefined-metric": EXIT_MISMATCH,
    "format-error": EXIT_FORMAT,
    "validation-error": EXIT_FORMAT,
    "io-error": EXIT_FORMAT,
}


class ServiceError(Exception):
    def __init__(self, slug: str, message: str):
        super().__init__(message)
        self.slug = slug
        self.message = message


class ServiceClient:
    """Thin HTTP client; in-process ASGI transport unless a server URL is given."""

    def __init__(self, server: str | None):
        self.server = server

    def call(self, method: str, path: str, body: dict | None = None) -> dict:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=600.0) as client:
                resp = client.request(method, path, json=body)
                return self._unwrap(resp)
        return asyncio.run(self._call_inprocess(method, path, body))

    async def _call_inprocess(self, method: str, path: str, body: dict | None) -> dict:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://noveval.local", timeout=None
        ) as client:
            resp = await client.request(method, path, json=body)
            return self._unwrap(resp)

    @staticmethod
    def _unwrap(resp: httpx.Response) -> dict:
        if resp.status_code < 400:
            return resp.json()
        try:
            doc = resp.json()
        except json.JSONDecodeError:
            raise ServiceError("error", f"HTTP {resp.status_code}: {resp.text}")
        slug = doc.get("error", "invalid-argument" if resp.status_code == 422 else "error")
        message = doc.get("message") or json.dumps(doc.get("detail", doc))
        raise ServiceError(slug, message)


def _die(slug: str, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(_EXIT_BY_SLUG.get(slug, 1))


def _call(client: ServiceClient, method: str, path: str, body: dict | None = None) -> dict:
    try:
        return client.call(method, path, body)
    except ServiceError as exc:
        _die(exc.slug, exc.message)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(1)


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--server",
    envvar="NOVEVAL_SERVER",
    default=None,
    metavar="URL",
    help="Remote service URL; defaults to running the service in-process.",
)
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Novel-class retrieval benchmark."""
    ctx.obj = ServiceClient(server)


@main.command("split")
@click.option("--builtin", "builtin_ds", metavar="DATASET", default=None)
@click.option("--kind", type=click.Choice(list(splits.BUILTIN_KINDS)), default=None)
@click.option("--taxonomy", "taxonomy_file", type=click.Path(), default=None)
@click.option(
    "--method",
    type=click.Choice(["random", "stratified_random", "semantic"]),
    default=None,
)
@click.option("--n-base", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--base-groups", default=None, help="Comma-separated superclass names.")
@click.option("-o", "--out", type=click.Path(), required=True)
@click.pass_obj
def cmd_split(
    client: ServiceClient,
    builtin_ds: str | None,
    kind: str | None,
    taxonomy_file: str | None,
    method: str | None,
    n_base: int | None,
    seed: int | None,
    base_groups: str | None,
    out: str,
) -> None:
    """Generate (or copy) a base/novel split and write it as JSON."""
    if (builtin_ds is None) == (taxonomy_file is None):
        raise click.UsageError("specify exactly one of --builtin or --taxonomy")
    if builtin_ds is not None:
        if kind is None:
            raise click.UsageError("--builtin requires --kind")
        doc = _call(client, "GET", f"/splits/builtin/{builtin_ds}/{kind}")
    else:
        if method is None:
            raise click.UsageError("--taxonomy requires --method")
        try:
            taxonomy = splits.read_taxonomy(taxonomy_file)
        except NovevalError as exc:
            _die(exc.slug, str(exc))
        body = {
            "taxonomy": splits.taxonomy_to_dict(taxonomy),
            "method": method,
            "n_base": n_base,
            "seed": seed,
            "base_groups": base_groups.split(",") if base_groups else None,
        }
        doc = _call(client, "POST", "/splits/generate", body)

    try:
        spec = splits.split_from_dict(doc)
        splits.write_split(spec, out)
    except NovevalError as exc:
        _die(exc.slug, str(exc))
    click.echo(
        f"wrote {out}: dataset={spec.dataset_id} method={spec.descriptor()} "
        f"seed={spec.seed if spec.seed is not None else '-'} "
        f"|base|={len(spec.base)} |novel|={len(spec.novel)}"
    )


@main.command("dump-builtin")
@click.option("--dataset", required=True, metavar="DATASET")
@click.option("--kind", type=click.Choice(list(splits.BUILTIN_KINDS)), default=None)
@click.option("--taxonomy", "want_taxonomy", is_flag=True, default=False)
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_obj
def cmd_dump_builtin(
    client: ServiceClient,
    dataset: str,
    kind: str | None,
    want_taxonomy: bool,
    out: str | None,
) -> None:
    """Dump a shipped split (or taxonomy) as canonical JSON."""
    if want_taxonomy == (kind is not None):
        raise click.UsageError("specify exactly one of --kind or --taxonomy")
    if want_taxonomy:
        doc = _call(client, "GET", f"/taxonomies/{dataset}")
        payload = (
            json.dumps(
                splits.taxonomy_to_dict(splits.taxonomy_from_dict(doc)),
                indent=2,
                ensure_ascii=False,
            )
            + "\n"
        ).encode("utf-8")
    else:
        doc = _call(client, "GET", f"/splits/builtin/{dataset}/{kind}")
        payload = splits.split_to_json_bytes(splits.split_from_dict(doc))
    if out:
        Path(out).write_bytes(payload)
        click.echo(f"wrote {out}", err=True)
    else:
        sys.stdout.write(payload.decode("utf-8"))


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(doc, dict):
        raise click.UsageError(f"config {path} must hold a JSON object")
    return doc


def _pick(flag, config: dict, key: str, default=None):
    if flag is not None:
        return flag
    return config.get(key, default)


@main.command("eval")
@click.option("--embeddings", type=click.Path(), default=None)
@click.option("--split", "split_file", type=click.Path(), default=None)
@click.option("--builtin", "builtin_ds", metavar="DATASET", default=None)
@click.option("--kind", type=click.Choice(list(splits.BUILTIN_KINDS)), default=None)
@click.option("--algorithm", default=None)
@click.option("--workers", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv"]), default=None)
@click.option("-o", "--out", type=click.Path(), default=None)
@click.option("--config", "config_file", type=click.Path(), default=None)
@click.pass_obj
def cmd_eval(
    client: ServiceClient,
    embeddings: str | None,
    split_file: str | None,
    builtin_ds: str | None,
    kind: str | None,
    algorithm: str | None,
    workers: int | None,
    fmt: str | None,
    out: str | None,
    config_file: str | None,
) -> None:
    """Evaluate an embedding file against a split; write the report JSON."""
    config = _load_config(config_file)
    embeddings = _pick(embeddings, config, "embeddings")
    split_file = _pick(split_file, config, "split")
    builtin_ds = _pick(builtin_ds, config, "builtin")
    kind = _pick(kind, config, "kind")
    algorithm = _pick(algorithm, config, "algorithm")
    fmt = _pick(fmt, config, "format", "markdown")
    out = _pick(out, config, "out")
    if workers is None:
        workers = config.get("workers")
    if workers is None:
        try:
            workers = int(os.environ.get("NOVEVAL_WORKERS", "0") or 0)
        except ValueError:
            raise click.UsageError("NOVEVAL_WORKERS must be an integer")

    if embeddings is None:
        raise click.UsageError("--embeddings is required (flag or config)")
    if out is None:
        raise click.UsageError("--out is required (flag or config)")
    if (split_file is None) == (builtin_ds is None):
        raise click.UsageError("specify exactly one split source: --split or --builtin")
    if workers < 0:
        raise click.UsageError("--workers must be >= 0")

    if builtin_ds is not None:
        if kind is None:
            raise click.UsageError("--builtin requires --kind")
        split_doc = _call(client, "GET", f"/splits/builtin/{builtin_ds}/{kind}")
    else:
        try:
            split_doc = splits.split_to_dict(splits.read_split(split_file))
        except NovevalError as exc:
            _die(exc.slug, str(exc))

    body = {
        "embeddings_path": str(Path(embeddings).resolve()),
        "split": split_doc,
        "algorithm": algorithm,
        "workers": workers,
    }
    resp = _call(client, "POST", "/evaluate", body)

    if resp["ignored_train_rows"]:
        click.echo(
            f"note: ignored {resp['ignored_train_rows']} train-tagged rows", err=True
        )
    report = metrics.report_from_dict(resp["report"])
    for warning in report.warnings:
        click.echo(f"warning: {warning}", err=True)

    metrics.write_report(report, out)
    rendered = _call(
        client, "POST", "/reports/render",
        {"reports": [resp["report"]], "format": fmt},
    )
    sys.stdout.write(rendered["text"])


@main.command("report")
@click.argument("report_files", nargs=-1, required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["markdown", "csv"]), default="markdown")
@click.option("-o", "--out", type=click.Path(), default=None)
@click.pass_obj
def cmd_report(
    client: ServiceClient, report_files: tuple[str, ...], fmt: str, out: str | None
) -> None:
    """Merge report JSON files into one base/novel table."""
    docs = []
    for path in report_files:
        try:
            docs.append(metrics.report_to_dict(metrics.read_report(path)))
        except NovevalError as exc:
            _die(exc.slug, f"{path}: {exc}")
    rendered = _call(client, "POST", "/reports/render", {"reports": docs, "format": fmt})
    if out:
        Path(out).write_text(rendered["text"], encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
    else:
        sys.stdout.write(rendered["text"])


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8030)
def cmd_serve(host: str, port: int) -> None:
    """Run the benchmark service under uvicorn."""
    import uvicorn

    uvicorn.run("noveval.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
