"""Command line entry point.

Subcommands: reach, reach-regular, cover, pn-reach, encode, pnreach, validate.
Exit codes: 0 = YES, 1 = NO (complete procedures only), 2 = UNKNOWN,
3 = input error (with a line/column diagnostic where available).

Every run emits a manifest (plain text by default, one JSON line with
--format json) recording the subcommand, input digests, the bounds used, the
verdict, the witness path and the wall time.  Identical inputs and flags
produce byte-identical witness files; the manifest differs only in wall_time.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field

from . import encodings, mpds, resetnet, senescent, summaries, systems
from .automata import format_nta, parse_nta
from .systems import Configuration
from .trees import parse_tree

YES, NO, UNKNOWN_CODE, INPUT_ERROR = 0, 1, 2, 3


@dataclass
class RunManifest:
    subcommand: str
    input_digests: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    verdict: str = "UNKNOWN"
    witness_path: str | None = None
    wall_time: float = 0.0

    def emit(self, fmt: str):
        if fmt == "json":
            print(json.dumps(self.__dict__, sort_keys=True))
        else:
            print("verdict: %s" % self.verdict)
            for k, v in sorted(self.bounds.items()):
                print("bound %s = %s" % (k, v))
            if self.witness_path:
                print("witness: %s" % self.witness_path)
            print("wall_time: %.3fs" % self.wall_time)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _read(path: str) -> str:
    with open(path, "r") as fh:
        return fh.read()


class InputError(Exception):
    pass


def _load_system(path: str, lifespan_flag):
    sys_, declared = systems.parse_system(_read(path))
    lifespan = lifespan_flag if lifespan_flag is not None else declared
    if lifespan is None:
        raise InputError("%s: no lifespan declared; pass --lifespan" % path)
    return senescent.SenescentSystem(sys_, lifespan)


def _parse_init(text: str, system):
    """"<ctrl>:<treefile-or-inline-tree>" -> Configuration with validation."""
    if ":" not in text:
        raise InputError("--init must look like control:tree (got %r)" % text)
    ctrl, rest = text.split(":", 1)
    ctrl = ctrl.strip()
    rest = rest.strip()
    if ctrl not in system.base.controls:
        raise InputError("unknown control %r" % ctrl)
    tree_text = _read(rest) if os.path.exists(rest) else rest
    from .trees import validate_tree

    return Configuration(ctrl, validate_tree(system.base.alphabet, tree_text.strip()))


def _witness_path(args, default_base: str) -> str:
    if getattr(args, "witness", None):
        return args.witness
    return default_base + ".witness"


def cmd_validate(args) -> int:
    manifest = RunManifest("validate", {args.input: _digest(args.input)})
    text = _read(args.input)
    head = text.lstrip().splitlines()[0] if text.strip() else ""
    if head.startswith("mpds"):
        system, scope = mpds.parse_mpds(text)
        print(
            "mpds: %d controls, %d stack symbols, %d stacks, %d rules, scope %d"
            % (len(system.controls), len(system.alphabet), system.stacks, len(system.rules), scope)
        )
    elif head.startswith("counters") or head.startswith("controls") and "rule" in text and "{" in text:
        net = resetnet.parse_resetnet(text)
        print(
            "reset net: %d controls, %d counters, %d rules"
            % (len(net.controls), len(net.counters), len(net.rules))
        )
    else:
        system, declared = systems.parse_system(text)
        problems = systems.validate_system(system)
        print(
            "sgtrs: %d controls, %d labels, %d rules%s"
            % (
                len(system.controls),
                len(system.alphabet),
                len(system.rules),
                ", lifespan %d" % declared if declared is not None else "",
            )
        )
        for p in problems:
            print("note: %s" % p)
    manifest.verdict = "OK"
    manifest.emit(args.format)
    return YES


def cmd_reach(args, regular: bool) -> int:
    t0 = time.monotonic()
    system = _load_system(args.system, args.lifespan)
    initial = _parse_init(args.init, system)
    rhs = args.rhs_size if args.rhs_size is not None else system.base.default_rhs_bound()
    manifest = RunManifest(
        "reach-regular" if regular else "reach",
        {args.system: _digest(args.system)},
        {"lifespan": system.lifespan, "depth": args.depth, "rhs-size": rhs, "jobs": args.jobs},
    )
    if regular:
        target_nta = parse_nta(_read(args.target_nta), system.base.alphabet)
        manifest.input_digests[args.target_nta] = _digest(args.target_nta)
        verdict = senescent.reach_regular(
            system, initial, args.target, target_nta, args.depth, rhs, args.jobs
        )
    else:
        verdict = senescent.reach_control(system, initial, args.target, args.depth, rhs, args.jobs)
    manifest.verdict = verdict.status
    if verdict.reachable:
        path = _witness_path(args, args.system)
        with open(path, "w") as fh:
            fh.write(senescent.format_witness(verdict.witness))
        manifest.witness_path = path
    manifest.wall_time = time.monotonic() - t0
    manifest.emit(args.format)
    if not verdict.reachable:
        print("exhausted: depth %d, rhs-size %d, lifespan %d" % (args.depth, rhs, system.lifespan))
    return YES if verdict.reachable else UNKNOWN_CODE


def cmd_cover(args) -> int:
    t0 = time.monotonic()
    net = resetnet.parse_resetnet(_read(args.net))
    src = resetnet.parse_config(args.from_, net)
    tgt = resetnet.parse_config(args.target, net)
    manifest = RunManifest("cover", {args.net: _digest(args.net)})
    if args.forward:
        manifest.bounds = {"depth": args.depth}
        verdict = resetnet.pn_cover_forward(net, src, tgt, args.depth)
        manifest.verdict = verdict.status
        manifest.wall_time = time.monotonic() - t0
        manifest.emit(args.format)
        return YES if verdict.reachable else UNKNOWN_CODE
    result = resetnet.pn_cover_backward(net, src, tgt)
    manifest.verdict = "YES" if result.covered else "NO"
    manifest.wall_time = time.monotonic() - t0
    manifest.emit(args.format)
    if result.covered and result.witness is not None:
        print("witness rules: %s" % " ".join(str(i + 1) for i in result.witness))
    return YES if result.covered else NO


def cmd_pn_reach(args) -> int:
    t0 = time.monotonic()
    net = resetnet.parse_resetnet(_read(args.net))
    src = resetnet.parse_config(args.from_, net)
    tgt = resetnet.parse_config(args.target, net)
    manifest = RunManifest("pn-reach", {args.net: _digest(args.net)}, {"depth": args.depth})
    verdict = resetnet.pn_reach_forward(net, src, tgt, args.depth)
    manifest.verdict = verdict.status
    manifest.wall_time = time.monotonic() - t0
    manifest.emit(args.format)
    return YES if verdict.reachable else UNKNOWN_CODE


def cmd_encode(args) -> int:
    t0 = time.monotonic()
    manifest = RunManifest("encode-" + args.kind, {args.input: _digest(args.input)})
    if args.kind == "scoped":
        system, scope = mpds.parse_mpds(_read(args.input))
        if args.init is None or args.target is None:
            raise InputError("encode scoped needs --init and --target controls")
        sen, report = encodings.encode_scoped(system, scope, args.init, args.target)
    else:
        net = resetnet.parse_resetnet(_read(args.input))
        if args.target is None:
            raise InputError("encode %s needs --target [ctrl:marking]" % args.kind)
        if ":" in args.target:
            tctrl, tmk = args.target.split(":", 1)
            marking = resetnet.parse_marking(tmk, net)
        else:
            tctrl, marking = args.target, net.zero()
        if args.kind == "cover":
            sen, report = encodings.encode_cover(net, tctrl.strip(), marking)
        else:
            sen, nta, report = encodings.encode_reach(net, tctrl.strip(), marking)
            with open(args.output + ".target-nta", "w") as fh:
                fh.write(format_nta(nta))
    with open(args.output, "w") as fh:
        fh.write(systems.format_system(sen.base, sen.lifespan))
    map_path = args.map or (args.output + ".map")
    with open(map_path, "w") as fh:
        fh.write("\n".join(report.mapping_lines()) + "\n")
        fh.write("initial-tree\t%s\n" % report.initial_tree)
        if report.initial_control is not None:
            fh.write("initial-control\t%s\n" % report.initial_control)
        fh.write("target-control\t%s\n" % report.target_control)
    manifest.verdict = "OK"
    manifest.bounds = {"lifespan": report.lifespan}
    manifest.wall_time = time.monotonic() - t0
    manifest.emit(args.format)
    return YES


def cmd_pnreach(args) -> int:
    t0 = time.monotonic()
    system = _load_system(args.system, args.lifespan)
    initial = _parse_init(args.init, system)
    rhs = args.rhs_size if args.rhs_size is not None else None
    manifest = RunManifest(
        "pnreach",
        {args.system: _digest(args.system)},
        {"lifespan": system.lifespan, "parikh-depth": args.parikh_depth},
    )
    encoding = summaries.build_pnreach(
        system, initial.control, args.target, initial.tree, args.parikh_depth, rhs
    )
    if args.emit_net:
        named = _stringify_net(encoding)
        with open(args.emit_net, "w") as fh:
            fh.write(resetnet.format_resetnet(named))
    covered = False
    if encoding.target_exists:
        covered = resetnet.pn_cover_backward(encoding.net, encoding.initial, encoding.target).covered
    manifest.verdict = "REACHABLE" if covered else "UNKNOWN"
    manifest.wall_time = time.monotonic() - t0
    manifest.emit(args.format)
    if not covered:
        print("exhausted: parikh-depth %d" % args.parikh_depth)
    return YES if covered else UNKNOWN_CODE


def _stringify_net(encoding) -> resetnet.ResetNet:
    names = encoding.state_names
    return resetnet.ResetNet(
        [names[s] for s in encoding.net.controls],
        encoding.net.counters,
        [
            resetnet.PnRule(names[r.source], r.ops, names[r.target])
            for r in encoding.net.rules
        ],
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgtrs", description=__doc__)
    p.add_argument("--format", choices=["text", "json"], default="text")
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="parse and check an input file")
    v.add_argument("input")

    def bounds_flags(sp, with_target_nta=False):
        sp.add_argument("system")
        sp.add_argument("--init", required=True, help="control:treefile (or inline tree)")
        sp.add_argument("--target", required=True)
        if with_target_nta:
            sp.add_argument("--target-nta", required=True)
        sp.add_argument("--lifespan", type=int, default=None)
        sp.add_argument("--depth", type=int, default=10)
        sp.add_argument("--rhs-size", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--witness", default=None)

    r = sub.add_parser("reach", help="senescent control state reachability (forward)")
    bounds_flags(r)
    rr = sub.add_parser("reach-regular", help="senescent regular reachability (forward)")
    bounds_flags(rr, with_target_nta=True)

    c = sub.add_parser("cover", help="reset net coverability (backward, exact)")
    c.add_argument("net")
    c.add_argument("--from", dest="from_", required=True, help="ctrl[:marking]")
    c.add_argument("--target", required=True, help="ctrl[:marking]")
    c.add_argument("--forward", action="store_true", help="bounded forward search instead")
    c.add_argument("--depth", type=int, default=10)

    pr = sub.add_parser("pn-reach", help="reset net exact-marking reachability (bounded)")
    pr.add_argument("net")
    pr.add_argument("--from", dest="from_", required=True)
    pr.add_argument("--target", required=True)
    pr.add_argument("--depth", type=int, default=10)

    e = sub.add_parser("encode", help="emit one of the senescent encodings")
    e.add_argument("kind", choices=["scoped", "cover", "reach"])
    e.add_argument("input")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--map", default=None)
    e.add_argument("--init", default=None)
    e.add_argument("--target", default=None)

    pn = sub.add_parser("pnreach", help="control reachability via interface summaries")
    pn.add_argument("system")
    pn.add_argument("--init", required=True)
    pn.add_argument("--target", required=True)
    pn.add_argument("--lifespan", type=int, default=None)
    pn.add_argument("--rhs-size", type=int, default=None)
    pn.add_argument("--emit-net", default=None)
    pn.add_argument("--parikh-depth", type=int, default=8)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "validate":
            return cmd_validate(args)
        if args.cmd == "reach":
            return cmd_reach(args, regular=False)
        if args.cmd == "reach-regular":
            return cmd_reach(args, regular=True)
        if args.cmd == "cover":
            return cmd_cover(args)
        if args.cmd == "pn-reach":
            return cmd_pn_reach(args)
        if args.cmd == "encode":
            return cmd_encode(args)
        if args.cmd == "pnreach":
            return cmd_pnreach(args)
        raise InputError("unknown subcommand %r" % args.cmd)
    except (InputError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
