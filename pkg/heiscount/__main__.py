#!/usr/bin/env python3
import argparse
import sys
import timeit

from heiscount import helper, verification
from heiscount.heiscounter import HeisCounter


def comma_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(',') if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"Cannot parse {text!r} as a comma separated list")
    return parse


def build_common_parser(suppress=False):
    """
    Options accepted before and after the subcommand; the subcommand copies carry no defaults (suppress=True)
    """
    def default(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--D', type=int, required=False, nargs=1, default=default([None]),
                        help="Fundamental discriminant")
    common.add_argument('--workers', type=int, required=False, nargs=1, default=default([None]), help="")
    common.add_argument('--generators', type=str, required=False, nargs=1, default=default([None]),
                        help="JSON file of generators of SU_q(O_K)")
    common.add_argument('--verbose', type=int, required=False, nargs=1, default=default([None]), help="")
    common.add_argument('--out', type=str, required=False, nargs=1, default=default([None]),
                        help="Output file, stdout if omitted")
    common.add_argument('--format', type=str, required=False, nargs=1, default=default(['csv']),
                        choices=['csv', 'json'], help="")
    common.add_argument('--write_opts', type=str, required=False, nargs=1, default=default([None]), help="")
    common.add_argument('--data_path', type=str, required=False, nargs=1, default=default([None]), help="")
    return common


def build_parser():
    parser = argparse.ArgumentParser(prog="heiscount", parents=[build_common_parser()],
                                     description="Count arithmetic orbits in the Heisenberg group and in complex "
                                                 "hyperbolic space")
    common = build_common_parser(suppress=True)

    sub = parser.add_subparsers(dest='command')
    sub.add_parser('field-info', parents=[common], help="Field data and closed-form constants")

    p = sub.add_parser('mertens', parents=[common], help="Count Heisenberg rational points of height at most s")
    p.add_argument('--s', type=comma_list(int), required=False, default=None, help="")
    p.add_argument('--m', type=comma_list(int), required=False, default=None,
                   help="Congruence ideal as HNF h11,h12,h22 or generators x1,y1,x2,y2")

    p = sub.add_parser('equidist', parents=[common], help="Box statistic of rational points")
    p.add_argument('--s', type=int, required=False, nargs=1, default=[None], help="")
    p.add_argument('--window', type=comma_list(float), required=False, default=None,
                   help="Re w, Im w, Im w0 ranges x0,x1,y0,y1,u0,u1")
    p.add_argument('--grid', type=int, required=False, nargs=1, default=[None], help="")
    p.add_argument('--normalization', type=str, required=False, nargs=1, default=[None],
                   choices=['lattice', 'stated'], help="")

    p = sub.add_parser('chains', parents=[common], help="Count arithmetic chains by diameter")
    p.add_argument('--depth', type=int, required=False, nargs=1, default=[None], help="")
    p.add_argument('--eps', type=comma_list(float), required=False, default=None, help="")
    p.add_argument('--emit-geometry', dest='emit_geometry', type=str, required=False, nargs=1, default=[None],
                   help="JSON file for chain geometry and centers")

    p = sub.add_parser('verify', parents=[common], help="Numerical and algebraic consistency checks")
    p.add_argument('--all', required=False, default=False, action="store_true", help="")
    for group in verification.CHECK_GROUPS:
        p.add_argument(f'--{group}', required=False, default=False, action="store_true", help="")

    p = sub.add_parser('cubic', parents=[common], help="Count Hermitian cubic points by complexity")
    p.add_argument('--gamma', type=str, required=False, nargs=1, default=[None],
                   help="JSON file of a loxodromic K-irreducible element")
    p.add_argument('--s', type=comma_list(float), required=False, default=None, help="")
    p.add_argument('--depth', type=int, required=False, nargs=1, default=[None], help="")

    return parser


def opts_from_args(args):
    # These options supersede everything (defaults, saved file)
    opts = {}
    if args.D[0] is not None:
        opts['disc'] = args.D[0]
    if args.workers[0] is not None:
        opts['workers'] = args.workers[0]
    if args.generators[0] is not None:
        opts['generators'] = args.generators[0]
    if args.verbose[0] is not None:
        opts['verbose'] = args.verbose[0]

    if args.command == 'mertens':
        opts['mertens'] = {}
        if args.s is not None:
            opts['mertens']['s_values'] = args.s
        if args.m is not None:
            opts['mertens']['ideal'] = args.m
    elif args.command == 'equidist':
        opts['equidist'] = {}
        if args.s[0] is not None:
            opts['equidist']['s'] = args.s[0]
        if args.window is not None:
            opts['equidist']['window'] = args.window
        if args.grid[0] is not None:
            opts['equidist']['grid'] = args.grid[0]
        if args.normalization[0] is not None:
            opts['equidist']['normalization'] = args.normalization[0]
    elif args.command == 'chains':
        opts['chains'] = {}
        if args.depth[0] is not None:
            opts['chains']['max_depth'] = args.depth[0]
        if args.eps is not None:
            opts['chains']['eps'] = args.eps
    elif args.command == 'cubic':
        opts['cubic'] = {}
        if args.depth[0] is not None:
            opts['cubic']['max_depth'] = args.depth[0]
        if args.s is not None:
            opts['cubic']['s_values'] = args.s
    return opts


def run(args):
    counter = HeisCounter(opts=opts_from_args(args), data_path=args.data_path[0])

    # Write options to file for later editing. File in data_path will be automatically included and supersedes defaults
    if isinstance(args.write_opts[0], str):
        HeisCounter.save_opts(counter.opts, args.write_opts[0])

    if args.command is None:
        return 0

    table = None
    status = 0
    if args.command == 'field-info':
        result = counter.run_field_info()
    elif args.command == 'mertens':
        result, table = counter.run_mertens()
    elif args.command == 'equidist':
        result, table = counter.run_equidist()
    elif args.command == 'chains':
        result, table = counter.run_chains(emit_geometry=args.emit_geometry[0])
    elif args.command == 'cubic':
        result, table = counter.run_cubic(gamma_path=args.gamma[0])
    elif args.command == 'verify':
        groups = [g for g in verification.CHECK_GROUPS if getattr(args, g)]
        if args.all or not groups:
            groups = list(verification.CHECK_GROUPS)
        result, table = counter.run_verify(groups)
        status = 0 if result['report']['passed'] else 1
    else:
        raise ValueError(f"Unknown command {args.command}")

    counter.save_result(result, table=table, output=args.out[0], fmt=args.format[0])
    return status


def main(argv=None):
    helper.log("Starting")
    tic = timeit.default_timer()
    args = build_parser().parse_args(argv)

    try:
        status = run(args)
    except ValueError as e:
        helper.log(f"ERROR: {type(e).__name__}: {e}")
        status = 2

    toc = timeit.default_timer()

    helper.log(f"Overall procedure took {toc - tic} s")

    return status


if __name__ == '__main__':
    sys.exit(main())
