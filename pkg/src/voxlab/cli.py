"""Command-line entry points: serve the API, run scripts headless, metrics."""
from __future__ import annotations

import argparse
import datetime
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .store import Store, StoreConfig

    app = create_app(Store(StoreConfig.from_env()), cors_origin=args.cors_origin)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _cmd_run(args) -> int:
    from .engine import STATUS_SUCCEEDED, execute_script, new_run_id
    from .store import layer_name_of

    case_dir = Path(args.case)
    if not case_dir.is_dir():
        print(f"error: case directory {case_dir} does not exist", file=sys.stderr)
        return EXIT_USAGE
    script_file = Path(args.script)
    if not script_file.is_file():
        print(f"error: script file {script_file} does not exist", file=sys.stderr)
        return EXIT_USAGE

    case_layers = []
    for path in sorted(case_dir.iterdir()):
        if path.is_file():
            name = layer_name_of(path.name)
            if name is not None:
                case_layers.append((name, path.name))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    from .engine import _header_identifiers  # same mapping the header uses

    idents = _header_identifiers(case_layers)

    record = execute_script(
        case_layers=case_layers,
        layer_file=lambda ident: case_dir / idents[ident],
        user_script_text=script_file.read_text(encoding="utf-8"),
        run_dir=out_dir,
        scripts_root=script_file.parent,
        run_id=new_run_id(),
        timestamp=timestamp,
        case_path=case_dir.name,
        import_resolver=_dir_import_resolver(script_file.parent),
    )
    for label, value in record.print_outputs:
        print(f"{label}\t{value:.6f}")
    if record.status != STATUS_SUCCEEDED:
        sys.stderr.write(record.log)
        return EXIT_FAILURE
    return EXIT_OK


def _dir_import_resolver(root: Path):
    from .imgql.analysis import SandboxViolation, resolve_inside

    def resolve(path: str):
        try:
            target = resolve_inside(root, path)
        except SandboxViolation:
            return None
        if not target.is_file():
            return None
        return target.read_text(encoding="utf-8")

    return resolve


def _cmd_dice(args) -> int:
    from .nifti import NiftiError, read_nifti
    from .volumes import DimsMismatchError, dice, volume_to_mask

    masks = []
    for filename in (args.a, args.b):
        path = Path(filename)
        if not path.is_file():
            print(f"error: {path} does not exist", file=sys.stderr)
            return EXIT_USAGE
        try:
            masks.append(volume_to_mask(read_nifti(path.read_bytes())))
        except NiftiError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    try:
        value = dice(masks[0], masks[1])
    except DimsMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"{value:.6f}")
    return EXIT_OK


def _cmd_check(args) -> int:
    from .imgql import expand, parse, typecheck, validate_sandbox

    script_file = Path(args.script)
    if not script_file.is_file():
        print(f"error: script file {script_file} does not exist", file=sys.stderr)
        return EXIT_USAGE
    text = script_file.read_text(encoding="utf-8")

    parsed = parse(text)
    if parsed.ast is None:
        for diag in parsed.diagnostics:
            print(str(diag), file=sys.stderr)
        return EXIT_FAILURE

    diagnostics = list(validate_sandbox(parsed.ast, scripts_root=script_file.parent))
    expanded = expand(parsed.ast, _dir_import_resolver(script_file.parent))
    if expanded.ast is None:
        diagnostics.extend(expanded.diagnostics)
    else:
        diagnostics.extend(typecheck(expanded.ast))
    for diag in diagnostics:
        print(str(diag), file=sys.stderr)
    return EXIT_FAILURE if diagnostics else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voxlab",
        description="Spatial-logic analysis of volumetric images",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="start the REST service")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--cors-origin", default=None,
                       help="enable CORS for this origin (off by default)")
    serve.set_defaults(func=_cmd_serve)

    run = sub.add_parser("run", help="run a script against a directory of layers")
    run.add_argument("--case", required=True, help="directory holding .nii/.nii.gz layers")
    run.add_argument("--script", required=True, help="script file (.imgql)")
    run.add_argument("--out", required=True, help="output directory for the run")
    run.set_defaults(func=_cmd_run)

    dice_cmd = sub.add_parser("dice", help="Dice coefficient of two mask volumes")
    dice_cmd.add_argument("a")
    dice_cmd.add_argument("b")
    dice_cmd.set_defaults(func=_cmd_dice)

    check = sub.add_parser("check", help="parse and type-check a script")
    check.add_argument("script")
    check.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
