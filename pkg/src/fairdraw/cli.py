"""Command-line tools: keygen, participate, audit, simulate, relay."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import audit as audit_mod
from . import crypto
from .client import RelayClient, participate as run_participate
from .errors import FairdrawError, FormatError
from .keys import keygen as run_keygen, load_private_key
from .model import DrawList, StakeholderId
from .report import write_report
from .simulate import AdversaryConfig, simulate as run_simulate
from .specfile import parse_spec_file
from .wire import load_transcript, save_transcript


@click.group(context_settings={"auto_envvar_prefix": "FAIRDRAW"})
def main():
    """Auditable multi-party random drawings."""


@main.command()
@click.option("--out", "out_dir", default=".", show_default=True,
              help="Directory for key.pem and key.pub.json.")
@click.option("--force", is_flag=True, help="Overwrite existing key files.")
def keygen(out_dir, force):
    """Generate an Ed25519 keypair and print its fingerprint."""
    try:
        priv, pub, fp = run_keygen(out_dir, force=force)
    except FairdrawError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"private key: {priv}")
    click.echo(f"public credential: {pub}")
    click.echo(f"fingerprint: {fp.hex()}")


@main.command(name="participate")
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("--key", "key_file", required=True, type=click.Path(exists=True),
              help="Ed25519 private key (PEM).")
@click.option("--relay", "relay_url", required=True, help="Relay base URL.")
@click.option("--timeout-secs", default=600.0, show_default=True,
              help="Per-phase deadline.")
@click.option("--poll-interval", default=0.2, show_default=True)
@click.option("--transcript-out", type=click.Path(), default=None,
              help="Where to save the local transcript view "
                   "[default: <spec>.transcript.json].")
def participate_cmd(spec_file, key_file, relay_url, timeout_secs, poll_interval,
                    transcript_out):
    """Run one drawing session end-to-end against a relay."""
    try:
        spec, public_keys = parse_spec_file(spec_file)
        sk, pk = load_private_key(key_file)
    except FairdrawError as exc:
        raise click.ClickException(str(exc))
    fp = crypto.fingerprint(pk)
    draws = spec if isinstance(spec, DrawList) else None
    roster = (draws.stakeholders() if draws else spec.stakeholders)
    self_id = next((s for s in roster if s.fingerprint == fp), None)
    if self_id is None:
        raise click.ClickException(
            f"key fingerprint {fp.hex()[:12]} is not a stakeholder in this spec"
        )
    relay = RelayClient(relay_url)
    try:
        result = run_participate(
            spec, self_id, sk, public_keys, relay,
            phase_timeout=timeout_secs, poll_interval=poll_interval,
        )
    finally:
        relay.close()
    out_path = transcript_out or (str(spec_file) + ".transcript.json")
    save_transcript(result.transcript, out_path)
    if result.exit_code == 0:
        for outcome in result.session.session_outcome():
            click.echo(
                f"{outcome.draw_id.render_lenient()}\t{outcome.result}\t"
                f"{outcome.candidate.identifier}"
            )
    else:
        click.echo(f"session did not complete: {result.error or 'aborted'}", err=True)
        for culprit in result.culprits:
            click.echo(f"non-compliant stakeholder: {culprit.hex()}", err=True)
    click.echo(f"transcript saved to {out_path}", err=True)
    sys.exit(result.exit_code)


def _finding_json(f):
    return {
        "kind": f.kind.value,
        "culprits": [c.hex() for c in f.culprits],
        "evidence": list(f.evidence),
        "detail": f.detail,
    }


@main.command(name="audit")
@click.argument("transcript_files", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def audit_cmd(transcript_files, as_json):
    """Verify transcripts; cross-check multiple views against each other."""
    try:
        transcripts = [load_transcript(p) for p in transcript_files]
    except FormatError as exc:
        click.echo(f"format error: {exc}", err=True)
        sys.exit(audit_mod.EXIT_FORMAT)

    reports = [audit_mod.audit_transcript(t) for t in transcripts]
    extra = []
    if len(transcripts) > 1:
        extra.extend(audit_mod.detect_equivocation(transcripts))
        for i in range(len(transcripts)):
            for j in range(len(transcripts)):
                if i != j and transcripts[j].server_view:
                    extra.extend(
                        audit_mod.cross_check_relay(transcripts[i], transcripts[j])
                    )

    exit_code = max(r.exit_code for r in reports)
    if extra:
        exit_code = max(exit_code, audit_mod.EXIT_MANIPULATED)

    if as_json:
        doc = {
            "reports": [
                {
                    "file": str(p),
                    "verdict": r.verdict.value,
                    "findings": [_finding_json(f) for f in r.findings],
                    "stakeholders": {fp.hex(): s for fp, s in r.stakeholder_status.items()},
                    "recomputed_outcome": (
                        [
                            {
                                "draw_id": o.draw_id.render_lenient(),
                                "d": o.result,
                                "candidate": o.candidate.identifier,
                            }
                            for o in r.recomputed_outcome
                        ]
                        if r.recomputed_outcome is not None else None
                    ),
                }
                for p, r in zip(transcript_files, reports)
            ],
            "cross_findings": [_finding_json(f) for f in extra],
            "exit_code": exit_code,
        }
        click.echo(json.dumps(doc, indent=2))
    else:
        for p, r in zip(transcript_files, reports):
            click.echo(f"{p}: {r.verdict.value.upper()}")
            for fp, s in sorted(r.stakeholder_status.items()):
                click.echo(f"  {fp.hex()[:12]}: {s}")
            for f in r.findings:
                who = ", ".join(c.hex()[:12] for c in f.culprits) or "-"
                click.echo(f"  finding: {f.kind.value} culprit={who} {f.detail}")
            if r.recomputed_outcome:
                for o in r.recomputed_outcome:
                    click.echo(
                        f"  result: {o.draw_id.render_lenient()}\t{o.result}\t"
                        f"{o.candidate.identifier}"
                    )
        for f in extra:
            who = ", ".join(c.hex()[:12] for c in f.culprits) or "-"
            click.echo(f"cross-check finding: {f.kind.value} culprit={who} {f.detail}")
    sys.exit(exit_code)


@main.command(name="simulate")
@click.argument("spec_file", type=click.Path(exists=True))
@click.option("--trials", default=100_000, show_default=True)
@click.option("--stakeholders", "n_stakeholders", default=None, type=int,
              help="Override the stakeholder count [default: roster size].")
@click.option("--colluders", default=0, show_default=True)
@click.option("--fixed-shares", default="",
              help="Comma-separated fixed shares for the colluders.")
@click.option("--seed", default=None, type=int)
@click.option("--out-dir", type=click.Path(), default=None,
              help="Write frequencies.tsv and frequencies.png here.")
@click.option("--json", "as_json", is_flag=True)
def simulate_cmd(spec_file, trials, n_stakeholders, colluders, fixed_shares, seed,
                 out_dir, as_json):
    """Empirical distribution check over many simulated sessions."""
    try:
        spec, _ = parse_spec_file(spec_file)
    except FairdrawError as exc:
        raise click.ClickException(str(exc))
    if isinstance(spec, DrawList):
        raise click.ClickException("simulate expects a single-draw spec")
    fixed = tuple(int(x) for x in fixed_shares.split(",") if x.strip())
    adversary = AdversaryConfig(colluders=colluders, fixed_shares=fixed)
    n = n_stakeholders or len(spec.stakeholders)
    try:
        result = run_simulate(spec.eligible, n, trials, adversary, seed=seed)
    except FairdrawError as exc:
        raise click.ClickException(str(exc))
    if result.all_colluding:
        click.echo(
            "WARNING: no honest stakeholder remains; the fairness claim is void",
            err=True,
        )
    if out_dir:
        table, figure = write_report(result, out_dir)
        click.echo(f"wrote {table} and {figure}", err=True)
    if as_json:
        click.echo(json.dumps({
            "trials": result.n_trials,
            "stakeholders": result.n_stakeholders,
            "honest": result.honest,
            "index_space": result.index_space,
            "chi2": result.chi2_stat,
            "p_value": result.p_value,
            "candidates": [
                {"candidate": c, "count": k, "frequency": f, "expected": e,
                 "deviation_sigma": d}
                for c, k, f, e, d in result.rows()
            ],
        }, indent=2))
    else:
        click.echo("candidate\tcount\tfrequency\texpected\tdeviation_sigma")
        for c, k, f, e, d in result.rows():
            click.echo(f"{c}\t{k}\t{f:.6f}\t{e:.6f}\t{d:+.3f}")
        click.echo(f"chi-square {result.chi2_stat:.3f}  p-value {result.p_value:.6f}")


@main.command(name="relay")
@click.option("--bind", default="127.0.0.1:8000", show_default=True,
              help="host:port to listen on.")
@click.option("--data", "data_path", default=":memory:", show_default=True,
              help="SQLite database path.")
def relay_cmd(bind, data_path):
    """Run the untrusted relay server."""
    import uvicorn

    from .relay import RelayStore, create_app

    host, _, port = bind.partition(":")
    store = RelayStore(data_path)
    uvicorn.run(create_app(store), host=host, port=int(port or 8000),
                log_level="warning")


if __name__ == "__main__":
    main()
