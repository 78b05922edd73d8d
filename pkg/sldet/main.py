import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from sldet import determinant, ode, spectrum, specfile
from sldet.config import settings
from sldet.determinant import Route
from sldet.errors import InputError, NumericalError, SldetError
from sldet.schemas import (
    DetReport,
    DiagnosticsReport,
    EigenvalueEntry,
    Family,
    SeriesReport,
    SpectrumReport,
    VerifyReport,
)

logger = logging.getLogger(__name__)

COMMANDS = ("det", "spectrum", "verify", "series")

# Relative agreement each route must reach against the Wronskian value.
ROUTE_TOLERANCES = {
    Route.MODEL_CLOSED: 1e-6,
    Route.FACTORIZED_CLOSED: 1e-5,
    Route.JACOBI_CLOSED: 1e-5,
    Route.ZETA_ORACLE: 1e-5,
    Route.TRACE: 1e-3,
    Route.PRODUCT: 1e-4,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    parser = _Parser(prog="sldet", description="Zeta-regularized determinants of Sturm-Liouville operators")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("target", help="operator file, a built-in family, or 'families' for verify")
    parser.add_argument("--count", type=int, default=5)
    parser.add_argument("--shift", type=float)
    parser.add_argument("--endpoint", type=int, choices=(0, 1), default=0)
    parser.add_argument("--terms", type=int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--s0", type=float)
    parser.add_argument("--s1", type=float)
    parser.add_argument("--dump-spec", action="store_true")
    parser.add_argument("--tol", type=float, help="tighten every route tolerance to at most this value")
    return parser


def resolve(args):
    """OperatorFile named by the target argument."""
    families = {f.value for f in Family}
    if args.target in families and not Path(args.target).is_file():
        spec = specfile.builtin(args.target, nu=args.nu, alpha=args.alpha, beta=args.beta,
                                s0=args.s0, s1=args.s1)
    else:
        spec = specfile.load(args.target)
    if args.shift is not None:
        spec = specfile.validate({**spec.model_dump(exclude_none=True), "shift": args.shift})
    return spec


def emit(report):
    print(json.dumps(report.model_dump(mode="json")))


# ----------------------
# Commands
# ----------------------
def run_det(spec, args):
    op = specfile.build_operator(spec, args.terms)
    result = determinant.det_wronskian(op, count_negative=True)
    d = result.diagnostics
    return DetReport(
        nu0=result.nu0,
        nu1=result.nu1,
        wronskian=result.wronskian,
        det=result.det,
        log_det=result.log_det,
        diagnostics=DiagnosticsReport(
            wronskian_drift=d.wronskian_drift,
            series_tail=d.series_tail,
            route=d.route.value,
            negative_eigenvalues=d.negative_eigenvalues,
        ),
    )


def run_spectrum(spec, args):
    op = specfile.build_operator(spec, args.terms)
    found = spectrum.eigenvalues(op, args.count)
    entries = [
        EigenvalueEntry(index=i, eigenvalue=mu, sign_changes=zeros)
        for i, (mu, zeros) in enumerate(zip(found.eigenvalues, found.count_certificate), start=1)
    ]
    return SpectrumReport(count=len(entries), eigenvalues=entries)


def run_series(spec, args):
    op = specfile.build_operator(spec, args.terms)
    end = ode.Endpoint.LEFT if args.endpoint == 0 else ode.Endpoint.RIGHT
    bc = op.bc_left if end is ode.Endpoint.LEFT else op.bc_right
    seed = ode.frobenius_seed(op.potential, end, bc, z=op.shift, terms=args.terms)
    return SeriesReport(endpoint=args.endpoint, nu=seed.nu, N=seed.order, shift=op.shift,
                        handoff=seed.handoff, coeffs=list(seed.coeffs))


def _wronskian_det(op):
    return determinant.det_wronskian(op).det


def verify_routes(spec, terms=None):
    """Route name -> zero-argument callable, in report order."""
    if spec.shift:
        raise InputError("verify compares closed forms of the unshifted operator; drop the shift")
    family = spec.family
    op = specfile.build_operator(spec, terms)
    routes = {Route.WRONSKIAN: lambda: _wronskian_det(op)}
    if family is Family.dirichlet:
        left = op.bc_left.kind.value
        right = (op.bc_right.kind.value, op.bc_right.A)
        if left == "dirichlet" and right == ("dirichlet", 0.0):
            routes[Route.ZETA_ORACLE] = lambda: spectrum.det_via_zeta_oracle("dirichlet_laplacian")
            routes[Route.MODEL_CLOSED] = lambda: determinant.det_model_closed(0.5)
        elif left == "dirichlet" and right == ("neumann", 0.0):
            routes[Route.ZETA_ORACLE] = lambda: spectrum.det_via_zeta_oracle("dirichlet_neumann")
        else:
            logger.warning("no independent route for boundary conditions %s/%s", spec.bc0, spec.bc1)
    elif family is Family.bessel:
        routes[Route.MODEL_CLOSED] = lambda: determinant.det_model_closed(spec.nu)
        routes[Route.TRACE] = lambda: spectrum.det_via_trace_model(spec.nu)
    elif family is Family.jacobi:
        a, b = spec.alpha, spec.beta
        routes[Route.JACOBI_CLOSED] = lambda: determinant.det_jacobi_closed(a, b)
        routes[Route.ZETA_ORACLE] = lambda: spectrum.det_via_zeta_oracle("jacobi", a, b)
        routes[Route.FACTORIZED_CLOSED] = lambda: determinant.det_factorized_closed(
            determinant.jacobi_factorized(a, b))
    elif family is Family.factorized:
        f = determinant.rational_factorized(spec.s0, spec.s1, spec.c or 0.0)
        routes[Route.FACTORIZED_CLOSED] = lambda: determinant.det_factorized_closed(f)
    else:
        raise InputError("verify needs a built-in family; custom operators have no independent route")
    return routes


def discrepancies(values):
    """Relative gap of every route to the Wronskian value."""
    reference = values[Route.WRONSKIAN.value]
    scale = abs(reference)
    gaps = {}
    for name, value in values.items():
        if name == Route.WRONSKIAN.value:
            continue
        gap = abs(value - reference)
        gaps[name] = gap / scale if scale > 0.0 else gap
    return gaps


def route_tolerances(names, tol=None):
    """Per-route tolerance; tol only tightens."""
    out = {}
    for name in names:
        budget = ROUTE_TOLERANCES[Route(name)]
        out[name] = budget if tol is None else min(budget, tol)
    return out


def run_verify(spec, args):
    routes = verify_routes(spec, args.terms)
    with ThreadPoolExecutor(max_workers=len(routes)) as pool:
        futures = {name.value: pool.submit(fn) for name, fn in routes.items()}
        values = {name: future.result() for name, future in futures.items()}
    parameters = {
        key: float(getattr(spec, key))
        for key in ("nu", "alpha", "beta", "s0", "s1", "c")
        if getattr(spec, key) is not None
    }
    gaps = discrepancies(values)
    return VerifyReport(family=spec.family, parameters=parameters, routes=values,
                        discrepancies=gaps, tolerances=route_tolerances(gaps, args.tol),
                        max_rel_discrepancy=max(gaps.values(), default=0.0))


def failed_routes(report):
    return [
        name for name, gap in report.discrepancies.items()
        if not math.isfinite(gap) or gap > report.tolerances[name]
    ]


def run_families():
    print(json.dumps({"families": [f.value for f in Family if f is not Family.custom]}))
    return 0


def run(args):
    if args.command == "verify" and args.target == "families":
        return run_families()
    spec = resolve(args)
    if args.dump_spec:
        sys.stdout.write(specfile.dumps(spec))
        return 0
    if args.command == "det":
        emit(run_det(spec, args))
    elif args.command == "spectrum":
        emit(run_spectrum(spec, args))
    elif args.command == "series":
        emit(run_series(spec, args))
    else:
        report = run_verify(spec, args)
        emit(report)
        failed = failed_routes(report)
        for name in failed:
            print(f"error: route {name} disagrees by {report.discrepancies[name]:.3g} "
                  f"(tolerance {report.tolerances[name]:g})", file=sys.stderr)
        if failed:
            return 2
    return 0


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=settings.log_level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except SldetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
