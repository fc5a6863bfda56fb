import os
import timeit

import yaml

from heiscount import chains, counting, helper, picard, verification, zeta
from heiscount.counter_opts import get_default_opts
from heiscount.exceptions import GuardExceededException, UnsupportedFieldException
from heiscount.quadint import ZLattice2, make_field, ideal_span, QuadInt


class HeisCounter:
    def __init__(self, disc=None, data_path=None, opts=None):
        if opts is None:
            opts = {}
        if disc is not None:
            opts['disc'] = disc

        self.data_path = data_path

        # Options
        self.opts = {}
        self.opts = self.load_opts(opts, self.data_path)

        self.field = make_field(self.opts['disc'])
        self.zeta_opts = self.opts['zeta']
        self.gens = None

        return

    @staticmethod
    def load_opts(opts, data_path=None):
        if data_path is not None and os.path.isfile(data_path + "/opts.yaml"):
            with open(data_path + "/opts.yaml", 'r') as f:
                fileopts = yaml.safe_load(f) or {}
            opts = helper.deepmerge_dicts(opts, fileopts)

        return helper.deepmerge_dicts(opts, get_default_opts())

    @staticmethod
    def save_opts(opts, path):
        opts_path = path + "/opts.yaml"
        with open(opts_path, 'w') as f:
            yaml.safe_dump(helper.to_jsonable(opts), f, sort_keys=True)
        helper.log(f"Options written to {opts_path}")
        return opts_path

    def log(self, *args, level=1):
        if self.opts['verbose'] >= level or self.opts['debug']:
            helper.log(*args)

    def get_generators(self):
        if self.gens is None:
            if self.opts['generators'] is not None:
                self.log(f"Loading generators from {self.opts['generators']}")
                self.gens = picard.load_generators(self.opts['generators'], self.field)
            else:
                self.gens = picard.default_generators(self.field)
        return self.gens

    def get_ideal(self, spec):
        """
        Congruence ideal from HNF integers (h11, h12, h22) or from generator coordinates (x1, y1, x2, y2, ...)
        """
        if spec is None:
            return None
        spec = [int(v) for v in spec]
        if len(spec) == 3:
            ideal = ZLattice2.from_hnf(self.field, *spec)
        elif len(spec) >= 2 and len(spec) % 2 == 0:
            ideal = ideal_span([QuadInt(self.field, x, y) for x, y in zip(spec[0::2], spec[1::2])])
        else:
            raise ValueError(f"An ideal is given by 3 HNF integers or by generator pairs, got {spec}")
        if ideal.is_zero():
            raise ValueError("The congruence ideal must be nonzero")
        return ideal

    def group_ratio(self, ideal):
        if ideal is None or ideal.index() == 1:
            return 1, None
        try:
            orders = counting.finite_group_orders(self.field, ideal, gens=self.get_generators())
        except (GuardExceededException, UnsupportedFieldException) as e:
            self.log(f"WARNING: {e}; using group ratio 1")
            return 1, None
        if orders.su_is_lower_bound:
            self.log("WARNING: |SU_q(O_K/m)| from generator closure is a lower bound")
        return orders.su_order / orders.b_order, orders

    def run_field_info(self):
        self.log('COMPUTING FIELD CONSTANTS')
        bundle = zeta.constants(self.field, self.zeta_opts,
                                chain_covolume=self.opts['chains']['covolume'], chain_n0=self.opts['chains']['n0'])
        return self.build_result('field-info', bundle._asdict())

    def run_mertens(self):
        self.log('COUNTING MERTENS ORBITS')
        tic = timeit.default_timer()
        ideal = self.get_ideal(self.opts['mertens']['ideal'])
        ratio, orders = self.group_ratio(ideal)
        report = counting.mertens_report(self.field, self.opts['mertens']['s_values'], ideal, group_ratio=ratio,
                                         zeta_opts=self.zeta_opts, workers=self.opts['workers'])
        toc = timeit.default_timer()
        self.log(f"Counting took {toc - tic} s")

        rows = [[s, n, helper.format_float(r), helper.format_float(rs)]
                for s, n, r, rs in zip(report.s_values, report.counts, report.ratios, report.ratios_stated)]
        other = {'group_orders': None if orders is None else orders._asdict()}
        return self.build_result('mertens', report._asdict(), other=other), \
            (['s', 'count', 'ratio', 'ratio_stated'], rows)

    def run_equidist(self):
        self.log('COUNTING RATIONAL POINTS IN BOXES')
        tic = timeit.default_timer()
        eq_opts = self.opts['equidist']
        boxes = counting.box_grid(eq_opts['window'], eq_opts['grid'])
        report = counting.equidist_report(self.field, eq_opts['s'], boxes, normalization=eq_opts['normalization'],
                                          zeta_opts=self.zeta_opts, workers=self.opts['workers'])
        toc = timeit.default_timer()
        self.log(f"Counting took {toc - tic} s")
        self.log(f"Discrepancy {report.discrepancy} over {len(boxes)} boxes")

        header = ['im_w0_lo', 'im_w0_hi', 're_w_lo', 're_w_hi', 'im_w_lo', 'im_w_hi', 'count', 'mass', 'volume']
        rows = []
        for (lo, hi), n, mass, vol in zip(report.boxes, report.counts, report.masses, report.volumes):
            bounds = [helper.format_float(v) for pair in zip(lo, hi) for v in pair]
            rows.append(bounds + [int(n), helper.format_float(mass), helper.format_float(vol)])
        return self.build_result('equidist', report._asdict()), (header, rows)

    def run_chains(self, emit_geometry=None):
        ch_opts = self.opts['chains']
        gens = self.get_generators()

        self.log('EXPANDING CHAIN ORBIT')
        tic = timeit.default_timer()
        report = counting.chain_count(self.field, gens, ch_opts['eps'], ch_opts['max_depth'],
                                      saturation_levels=ch_opts['saturation_levels'],
                                      max_size=self.opts['max_orbit_size'], workers=self.opts['workers'],
                                      zeta_opts=self.zeta_opts, covolume=ch_opts['covolume'], n0=ch_opts['n0'],
                                      verbose=self.opts['verbose'])
        toc = timeit.default_timer()
        self.log(f"Orbit expansion took {toc - tic} s, {len(report.orbit)} classes")
        if not all(report.saturated):
            self.log("WARNING: chain counts are not saturated, increase the depth")

        other = {'caveat': counting.CHAIN_CAVEAT, 'level_sizes': report.orbit.level_sizes}
        if emit_geometry is not None:
            self.log('EXPORTING CHAIN GEOMETRY')
            eps_min = min(ch_opts['eps'])
            normalization = 'lattice' if report.constant is not None else 'empirical'
            records = [chains.chain_record(chains.PolarPoint(v), ch_opts['n_samples'])
                       for v in report.orbit.vectors(counting.chain_bound(1, eps_min))]
            _, center_report = counting.chain_centers(self.field, gens, eps_min, ch_opts['max_depth'],
                                                      ch_opts['window'], orbit=report.orbit, grid=ch_opts['grid'],
                                                      normalization=normalization,
                                                      zeta_opts=self.zeta_opts, covolume=ch_opts['covolume'],
                                                      n0=ch_opts['n0'])
            geometry = self.build_result('chain-geometry', {'eps': eps_min, 'chains': records,
                                                            'centers': center_report._asdict()})
            helper.write_json(geometry, emit_geometry)
            self.log(f"Saved chain geometry to file {emit_geometry}")

        result = report._asdict()
        del result['orbit']
        result['n_classes'] = len(report.orbit)
        rows = [[helper.format_float(e), b, n, int(sat), helper.format_float(r), helper.format_float(rs)]
                for e, b, n, sat, r, rs in zip(report.eps, report.bounds, report.counts, report.saturated,
                                                report.ratios, report.ratios_stated)]
        return self.build_result('chains', result, other=other), \
            (['eps', 'bound', 'count', 'saturated', 'ratio', 'ratio_stated'], rows)

    def run_cubic(self, gamma_path=None):
        cu_opts = self.opts['cubic']
        if gamma_path is None:
            gamma0 = picard.default_cubic_seed(self.field)
        else:
            gamma0 = picard.load_element(gamma_path, self.field)
        cls = picard.classify(gamma0)
        self.log(f"Seed classification: {cls.kind}, eigenvalue moduli {[abs(e) for e in cls.eigenvalues]}")

        self.log('EXPANDING CUBIC POINT ORBIT')
        tic = timeit.default_timer()
        report = counting.cubic_count(gamma0, self.get_generators(), cu_opts['s_values'], cu_opts['max_depth'],
                                      ndigits=cu_opts['ndigits'], iota0=cu_opts['iota0'], n0=cu_opts['n0'],
                                      zeta_opts=self.zeta_opts, max_size=self.opts['max_orbit_size'],
                                      radius_scale=cu_opts['radius_scale'], radius_margin=cu_opts['radius_margin'],
                                      verbose=self.opts['verbose'])
        toc = timeit.default_timer()
        self.log(f"Orbit expansion took {toc - tic} s")
        self.log(f"ln|lambda| = {report.translation_length}, slope = {report.slope}")

        result = report._asdict()
        result['complexities'] = report.complexities[:1000]
        rows = [[helper.format_float(s), n] for s, n in zip(report.s_values, report.counts)]
        return self.build_result('cubic', result, other={'gamma': gamma0.to_json()}), (['s', 'count'], rows)

    def run_verify(self, groups=verification.CHECK_GROUPS):
        self.log('RUNNING VERIFICATION')
        tic = timeit.default_timer()
        checks = verification.run_checks(self.opts, groups)
        toc = timeit.default_timer()
        self.log(f"Verification took {toc - tic} s")
        for c in checks:
            if not c.passed:
                self.log(f"FAILED {c.group}/{c.name}: {c.value} {c.detail}")

        rows = [[c.group, c.name, int(c.passed), helper.format_float(c.value) if c.value is not None else '']
                for c in checks]
        result = self.build_result('verify', {'checks': [c._asdict() for c in checks],
                                              'passed': all(c.passed for c in checks)})
        return result, (['group', 'name', 'passed', 'value'], rows)

    def build_result(self, kind, report, other=None):
        if other is None:
            other = dict()
        result = {
            'version': 1.0,  # Increase when this structure changes
            'schema': self.opts['schema'],
            'kind': kind,
            'field': self.field.info(),
            'report': report,
            'info': {  # Additional nonessential info from the run
                'opts': self.opts,
                'other': other,  # Additional info without guaranteed structure
            }
        }
        return result

    def save_result(self, result, table=None, output=None, fmt='csv'):
        """
        Writes the table as CSV or the full result as JSON, to output or to stdout if output is None
        """
        if fmt == 'csv' and table is not None:
            header, rows = table
            helper.write_csv(header, rows, output)
        elif fmt in ('csv', 'json'):
            helper.write_json(result, output)
        else:
            raise ValueError(f"Unknown output format {fmt}")
        if output is not None:
            self.log(f"Saved {result['kind']} result to file {output}")
        return
