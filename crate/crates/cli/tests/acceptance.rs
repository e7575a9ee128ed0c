//! Acceptance suite: one line per criterion, nonzero exit if any is not a pass.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command as Proc, ExitCode};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fqsl::combinat::{self, FamilyKind, Omega, VectorFamily};
use fqsl::estimates::{
    self, expectation, CheckStatus, DeltaKind, JansonStatus, Kind, SigmaQuery,
};
use fqsl::lifting;
use fqsl::parabola::{self, ParabolaCtx};
use fqsl::polyring::{PackedRing, PolyRing};
use fqsl::randmodel::{Model, ModelParams};
use fqsl::ratio::Rational;

enum Verdict {
    Pass(String),
    Fail(String),
    Inconclusive(String),
}

use Verdict::{Fail, Inconclusive, Pass};

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn within(limit: Duration, start: Instant, v: Verdict) -> Verdict {
    let took = start.elapsed();
    match v {
        Pass(d) if took > limit => Fail(format!("{d}; took {took:.2?}, limit {limit:?}")),
        other => other,
    }
}

fn gamma() -> Rational {
    Rational::new(7, 11)
}

fn model(n: u32, s: Vec<u64>, m: u32, d: u32, eps: Option<Rational>, seed: u64) -> Model {
    Model::new(ModelParams {
        p: 5,
        h: 1,
        n,
        s,
        gamma: gamma(),
        m,
        d,
        epsilon: eps,
        seed,
    })
    .expect("valid model")
}

fn parabola_residues() -> Vec<u64> {
    parabola::build_sidon_in_gn(5, 1, 1).unwrap().elements
}

fn c1_sidon_basis3() -> Verdict {
    let start = Instant::now();
    let ctx = ParabolaCtx::new(5, 1, 1).unwrap();
    let set = parabola::build_parabola(&ctx);
    let sidon = parabola::verify_sidon(&set);
    let pk = set.ambient.packed();
    let mut diffs: HashMap<u64, u32> = HashMap::new();
    for &a in &set.elements {
        for &b in &set.elements {
            if a != b {
                *diffs.entry(pk.sub(a, b)).or_default() += 1;
            }
        }
    }
    let counts = parabola::three_sum_counts(&set);
    let b3 = parabola::verify_basis3_distinct(&ctx);
    let ok = set.len() == 25
        && sidon.max_multiplicity == 1
        && diffs.len() == 600
        && diffs.values().all(|&c| c == 1)
        && counts.len() == 625
        && b3.min_reps >= 1
        && b3.failing_targets.is_empty();
    within(
        Duration::from_secs(1),
        start,
        verdict(
            ok,
            format!(
                "|S| = {}, max difference multiplicity {}, basis-3 min reps {} over {} targets",
                set.len(),
                sidon.max_multiplicity,
                b3.min_reps,
                counts.len()
            ),
        ),
    )
}

fn c2_basis4() -> Verdict {
    let start = Instant::now();
    let ctx = ParabolaCtx::new(5, 1, 1).unwrap();
    let b4 = parabola::verify_basis4_distinct(&ctx);
    within(
        Duration::from_secs(5),
        start,
        verdict(
            b4.holds() && b4.failing_targets.is_empty(),
            format!("basis-4 min reps {} over 625 targets", b4.min_reps),
        ),
    )
}

/// Largest `|total - q'|` at `q' = 25`, reached at the 25 targets with `3b = a^2`.
const PINNED_MAX_DEVIATION: u64 = 24;

fn c3_system_counts() -> Verdict {
    let ctx = ParabolaCtx::new(5, 1, 1).unwrap();
    let f = ctx.prime_field();
    let qp = ctx.q_prime();
    // brute-force triple loop over F_25
    let mut brute: HashMap<(u32, u32), u64> = HashMap::new();
    let els = f.elements();
    for &x in &els {
        for &y in &els {
            for &z in &els {
                let a = f.add(f.add(x, y), z);
                let b = f.add(f.add(f.mul(x, x), f.mul(y, y)), f.mul(z, z));
                *brute.entry((a.index(), b.index())).or_default() += 1;
            }
        }
    }
    let mut max_dev = 0u64;
    let mut max_rep = 0u64;
    let mut agree = true;
    for &a in &els {
        for &b in &els {
            let c = parabola::count_system_solutions(&ctx, a, b);
            agree &= c.total == brute.get(&(a.index(), b.index())).copied().unwrap_or(0);
            max_dev = max_dev.max(c.total.abs_diff(qp));
            max_rep = max_rep.max(c.repeated_coords());
        }
    }
    let t1 = parabola::deviation_table(&ctx, &parabola::system_table(&ctx));
    let t2 = parabola::deviation_table(&ctx, &parabola::system_table(&ctx));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t3 = pool.install(|| parabola::deviation_table(&ctx, &parabola::system_table(&ctx)));
    let stable = t1 == t2 && t1 == t3;
    verdict(
        agree && stable && max_dev == PINNED_MAX_DEVIATION && max_rep <= 6,
        format!(
            "max |total - q'| = {max_dev} (pinned {PINNED_MAX_DEVIATION}), deviations {t1:?}, max repeated-coordinate solutions {max_rep}"
        ),
    )
}

fn c4_pullback() -> Verdict {
    let start = Instant::now();
    let ctx = ParabolaCtx::new(5, 1, 1).unwrap();
    let ring = PolyRing::new(ctx.base().clone());
    let pk = ring.packed().clone();
    let set = parabola::build_sidon_in_gn(5, 1, 1).unwrap();
    let sidon = parabola::verify_sidon(&set);
    let counts = parabola::three_sum_counts(&set);
    let basis = counts.len() == 625 && counts.iter().all(|&c| c >= 1);
    let iso: Vec<_> = (0..625u64)
        .map(|c| ctx.iso_to_product(&ring, &ring.from_code(c)).unwrap())
        .collect();
    let images: HashSet<_> = iso.iter().map(|&(x, y)| (x.index(), y.index())).collect();
    let f = ctx.prime_field();
    let mut additive = true;
    for a in 0..625u64 {
        for b in 0..625u64 {
            let (xa, ya) = iso[a as usize];
            let (xb, yb) = iso[b as usize];
            additive &= iso[pk.add(a, b) as usize] == (f.add(xa, xb), f.add(ya, yb));
        }
    }
    let ok = set.len() == 25 && sidon.is_sidon() && basis && additive && images.len() == 625;
    verdict(
        ok,
        format!(
            "25 polynomials in G_4, Sidon {}, basis-3 min reps {}, iso additive on 390625 pairs {}, bijective {} ({:.2?})",
            sidon.is_sidon(),
            counts.iter().min().unwrap_or(&0),
            additive,
            images.len() == 625,
            start.elapsed()
        ),
    )
}

fn c5_sigma_dual_path() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let exps: Vec<Rational> = (1..11)
        .map(|k| Rational::new(k, 11))
        .chain((1..7).map(|k| Rational::new(k, 7)))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let q = SigmaQuery {
            p: 5,
            h: 1,
            alpha: exps[rng.random_range(0..exps.len())],
            beta: exps[rng.random_range(0..exps.len())],
            n: rng.random_range(0..5u64.pow(7)),
            m: [-1, 0, 2][rng.random_range(0..3)],
            d: 8,
        };
        let a = estimates::sigma_direct(&q).unwrap();
        let b = estimates::sigma_closed(&q).unwrap();
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
    }
    within(
        Duration::from_secs(60),
        start,
        verdict(worst < 1e-9, format!("200 queries, worst relative gap {worst:.2e}")),
    )
}

fn c6_lemma_ratios() -> Verdict {
    let cal = estimates::Calibration::committed();
    let mut rows = Vec::new();
    for (lemma, params) in estimates::sigma::reference_sweeps() {
        rows.extend(estimates::check_basic_lemma(lemma, &params, 1..=8, Some(&cal)).unwrap());
    }
    let ids: HashSet<&str> = rows.iter().map(|r| r.id.as_str()).collect();
    let branches = ["basic1", "basic2", "basic2_a0", "basic3"].iter().all(|i| ids.contains(i));
    let finite = rows.iter().all(|r| r.ratio.is_finite() && r.tail_estimate.is_finite());
    let fails = rows.iter().filter(|r| r.status == CheckStatus::Fail).count();
    let inconclusive = rows.iter().filter(|r| r.status == CheckStatus::Inconclusive).count();
    let unpinned = rows.iter().filter(|r| r.status == CheckStatus::Unpinned).count();
    let worst = rows
        .iter()
        .map(|r| r.ratio / r.pinned.unwrap_or(f64::NAN))
        .fold(0.0f64, f64::max);
    let detail = format!(
        "{} sweep points, worst ratio/pin {worst:.4}, max tail {:.2e}, {fails} failed, {inconclusive} inconclusive",
        rows.len(),
        rows.iter().map(|r| r.tail_estimate).fold(0.0, f64::max)
    );
    if !branches || !finite || fails > 0 || unpinned > 0 {
        Fail(detail)
    } else if inconclusive > 0 {
        Inconclusive(detail)
    } else {
        Pass(detail)
    }
}

/// Samples whose every target is also checked by full counts on the lifted set.
const DIRECT_SEEDS: u64 = 20;

fn c7_lifting() -> Verdict {
    let s = parabola_residues();
    let eps = Rational::new(2, 3);
    let (mut targets, mut witnesses) = (0usize, 0u64);
    let mut bad = Vec::new();
    for seed in 0..100u64 {
        let m = model(4, s.clone(), 4, 10, Some(eps), seed);
        let sample = m.sample();
        let rep = lifting::verify_lift_inequalities(&sample);
        let mut ok = rep.all_hold() && rep.checks.len() == 2;
        if seed >= DIRECT_SEEDS {
            if !ok {
                bad.push(seed);
            }
            continue;
        }
        let pk = m.packed();
        let om = Omega::from_sample(&sample);
        let b22 = lifting::lift_b22(pk, &sample.members);
        let sid = lifting::lift_sidon(pk, &sample.members);
        ok &= combinat::verify_b2g(pk, &b22.survivors, 2).holds()
            && combinat::verify_b2g(pk, &sid.survivors, 1).holds();
        // every target directly: counts on the lifted set against counts on omega
        let lifted_q = combinat::qt_counts(&Omega::new(pk.clone(), 4, &b22.survivors));
        let lifted_r = combinat::rb_counts(&Omega::new(pk.clone(), 4, &sid.survivors), eps);
        for (fam, orig, lifted) in [
            ("Q", combinat::qt_counts(&om), lifted_q),
            ("R", combinat::rb_counts(&om, eps), lifted_r),
        ] {
            for (n, &(count, violations)) in &orig {
                let kept = lifted.get(n).map_or(0, |c| c.0);
                ok &= pk.deg(*n).get().is_none_or(|d| d <= 10) && kept + violations >= count;
                targets += 1;
                witnesses += count;
            }
            ok &= rep.checks.iter().any(|c| c.family == fam && c.witnesses == orig.values().map(|c| c.0).sum::<u64>());
        }
        if !ok {
            bad.push(seed);
        }
    }
    verdict(
        bad.is_empty(),
        format!("100 samples, {DIRECT_SEEDS} also checked directly over {targets} targets and {witnesses} witnesses, failing seeds {bad:?}"),
    )
}

// Brute-force oracles written from the defining conditions.

struct Brute<'a> {
    pk: &'a PackedRing,
    w: &'a [u64],
    n0: u32,
}

impl Brute<'_> {
    fn res(&self, x: u64) -> u64 {
        self.pk.residue(x, self.n0)
    }

    fn has(&self, x: u64) -> bool {
        self.w.contains(&x)
    }

    fn q(&self) -> BTreeMap<u64, u64> {
        let w = self.w;
        let mut out = BTreeMap::new();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                for k in j + 1..w.len() {
                    let (a, b, c) = (w[i], w[j], w[k]);
                    if self.res(a) != self.res(b) && self.res(a) != self.res(c) && self.res(b) != self.res(c) {
                        *out.entry(self.pk.add(self.pk.add(a, b), c)).or_default() += 1;
                    }
                }
            }
        }
        out
    }

    fn t(&self) -> BTreeMap<u64, u64> {
        let (pk, w) = (self.pk, self.w);
        let mut out = BTreeMap::new();
        for &x1 in w {
            for &x2 in w {
                for &x3 in w {
                    let rs = [self.res(x1), self.res(x2), self.res(x3)];
                    if x1 == x2 || x1 == x3 || x2 == x3 || rs[0] == rs[1] || rs[0] == rs[2] || rs[1] == rs[2] {
                        continue;
                    }
                    let n = pk.add(pk.add(x1, x2), x3);
                    for &x4 in w {
                        let s = pk.add(x1, x4);
                        for &x5 in w {
                            let x6 = pk.sub(s, x5);
                            if !self.has(x6) || self.res(x5) != rs[0] || self.res(x6) != self.res(x4) {
                                continue;
                            }
                            if set2(x1, x4) == set2(x5, x6) {
                                continue;
                            }
                            for &x7 in w {
                                let x8 = pk.sub(s, x7);
                                if self.has(x8)
                                    && self.res(x7) == rs[0]
                                    && self.res(x8) == self.res(x4)
                                    && set2(x5, x6) != set2(x7, x8)
                                {
                                    *out.entry(n).or_default() += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn small(&self, xs: &[u64], eps: Rational, n: u64) -> bool {
        let min = xs.iter().map(|&x| self.pk.deg(x).as_i64_or(-1)).min().unwrap();
        let dn = self.pk.deg(n).as_i64_or(-1);
        Rational::from_integer(min) <= eps * Rational::from_integer(dn)
    }

    fn r(&self, eps: Rational) -> BTreeMap<u64, u64> {
        let (pk, w) = (self.pk, self.w);
        let mut out = BTreeMap::new();
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                for k in j + 1..w.len() {
                    for l in k + 1..w.len() {
                        let xs = [w[i], w[j], w[k], w[l]];
                        let rs: HashSet<u64> = xs.iter().map(|&x| self.res(x)).collect();
                        let n = xs.iter().fold(0, |acc, &x| pk.add(acc, x));
                        if rs.len() == 4 && n != 0 && self.small(&xs, eps, n) {
                            *out.entry(n).or_default() += 1;
                        }
                    }
                }
            }
        }
        out
    }

    fn b(&self, eps: Rational) -> BTreeMap<u64, u64> {
        let (pk, w) = (self.pk, self.w);
        let mut out = BTreeMap::new();
        for &x1 in w {
            for &x2 in w {
                for &x3 in w {
                    for &x4 in w {
                        let xs = [x1, x2, x3, x4];
                        let distinct: HashSet<u64> = xs.iter().copied().collect();
                        let rs: HashSet<u64> = xs.iter().map(|&x| self.res(x)).collect();
                        let n = xs.iter().fold(0, |acc, &x| pk.add(acc, x));
                        if distinct.len() != 4 || rs.len() != 4 || n == 0 || !self.small(&xs, eps, n) {
                            continue;
                        }
                        for &x5 in w {
                            for &x6 in w {
                                let x7 = pk.sub(pk.add(x1, x5), x6);
                                if self.has(x7)
                                    && self.res(x6) == self.res(x1)
                                    && self.res(x7) == self.res(x5)
                                    && set2(x1, x5) != set2(x6, x7)
                                {
                                    *out.entry(n).or_default() += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn family(&self, kind: FamilyKind) -> BTreeMap<u64, u64> {
        let (pk, w) = (self.pk, self.w);
        let mut out = BTreeMap::new();
        let mut bump = |r: u64| *out.entry(r).or_default() += 1;
        match kind {
            FamilyKind::U | FamilyKind::V => {
                for &a in w {
                    for &b in w {
                        if a != b {
                            bump(if kind == FamilyKind::U { pk.add(a, b) } else { pk.sub(a, b) });
                        }
                    }
                }
            }
            FamilyKind::UPrime | FamilyKind::VPrime => {
                for &a in w {
                    for &b in w {
                        for &c in w {
                            if a != b && a != c && b != c {
                                let s = pk.add(a, b);
                                bump(if kind == FamilyKind::UPrime { pk.add(s, c) } else { pk.sub(s, c) });
                            }
                        }
                    }
                }
            }
            FamilyKind::W => {
                for &x4 in w {
                    for &x5 in w {
                        for &x6 in w {
                            let r = pk.sub(pk.add(x5, x6), x4);
                            for &x7 in w {
                                for &x8 in w {
                                    let xs = [x4, x5, x6, x7, x8];
                                    let distinct: HashSet<u64> = xs.iter().copied().collect();
                                    if distinct.len() == 5 && pk.sub(pk.add(x7, x8), x4) == r {
                                        bump(r);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn set2(a: u64, b: u64) -> (u64, u64) {
    (a.min(b), a.max(b))
}

fn c8_counter_oracles() -> Verdict {
    let pk = PackedRing::new(5, 1);
    let mut rng = StdRng::seed_from_u64(8);
    let mut mismatches = Vec::new();
    let mut nonzero = [0usize; 4];
    for trial in 0..100 {
        let (universe, n0) = if trial % 2 == 0 { (125u64, 1) } else { (625, 2) };
        let size = rng.random_range(3..=12);
        let mut w: Vec<u64> = Vec::new();
        while w.len() < size {
            let x = rng.random_range(1..universe);
            if !w.contains(&x) {
                w.push(x);
            }
        }
        w.sort_unstable();
        let eps = [Rational::new(1, 3), Rational::new(1, 2), Rational::new(3, 4)][trial % 3];
        let om = Omega::new(pk.clone(), n0, &w);
        let br = Brute { pk: &pk, w: &w, n0 };
        let (q, t, r, b) = (br.q(), br.t(), br.r(eps), br.b(eps));
        let mut targets: HashSet<u64> = q.keys().chain(r.keys()).copied().collect();
        for _ in 0..5 {
            targets.insert(rng.random_range(1..universe));
        }
        let get = |m: &BTreeMap<u64, u64>, k: u64| m.get(&k).copied().unwrap_or(0);
        for &n in &targets {
            let got = [
                combinat::count_qn(&om, n),
                combinat::count_tn(&om, n),
                // R_n and B_n are only defined for n != 0
                combinat::count_rn(&om, n, Some(eps)).unwrap_or(if n == 0 { 0 } else { u64::MAX }),
                combinat::count_bn(&om, n, Some(eps)).unwrap_or(if n == 0 { 0 } else { u64::MAX }),
            ];
            let want = [get(&q, n), get(&t, n), get(&r, n), get(&b, n)];
            for i in 0..4 {
                nonzero[i] += usize::from(want[i] > 0);
            }
            if got != want {
                mismatches.push(format!("trial {trial} n={n}: {got:?} vs {want:?}"));
            }
        }
        for kind in FamilyKind::ALL {
            let want = br.family(kind);
            let mut rs: HashSet<u64> = want.keys().copied().collect();
            for _ in 0..5 {
                rs.insert(rng.random_range(0..universe));
            }
            for &r in &rs {
                let got = combinat::family_counts(&om, kind, r);
                if got != get(&want, r) {
                    mismatches.push(format!("trial {trial} {} r={r}: {got} vs {}", kind.name(), get(&want, r)));
                }
            }
        }
    }
    let coverage = nonzero.iter().all(|&c| c > 0);
    verdict(
        mismatches.is_empty() && coverage,
        format!(
            "100 random samples, nonzero targets Q/T/R/B {nonzero:?}, mismatches {}{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn c9_expectations() -> Verdict {
    let all: Vec<u64> = (0..25).collect();
    let m = model(2, all, 1, 5, None, 0);
    let target = 5u64.pow(5) + 2 * 5u64.pow(4) + 3;
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [Kind::Qn, Kind::Ur, Kind::Vr] {
        let exact = expectation::expectation_exact(&m, kind, target).unwrap();
        let (mean, se) = estimates::mc_mean(&m, kind, target, 1000, 500).unwrap();
        let z = (mean - exact).abs() / se;
        ok &= z <= 4.0;
        parts.push(format!("{}: exact {exact:.3} mc {mean:.3} ({z:.2} SE)", kind.name()));
    }
    let s = parabola_residues();
    let lm = model(4, s, 4, 7, None, 0);
    let q = 5f64;
    let g = 7.0 / 11.0;
    let mut worst = f64::INFINITY;
    for d in 5..=7u32 {
        for n in [5u64.pow(d) + 1, 5u64.pow(d) + 3 * 5u64.pow(d - 1) + 17, 2 * 5u64.pow(d) + 5u64.pow(4) + 4] {
            let mu = expectation::expectation_exact(&lm, Kind::Qn, n).unwrap();
            let lb = (q * (q - 3.0)).powi(d as i32 - 4) / 6.0 * q.powf(-3.0 * g * d as f64);
            worst = worst.min(mu / lb);
        }
    }
    ok &= worst >= 1.0;
    parts.push(format!("lower bound at deg 5..7: min E|Q_n|/bound {worst:.3e}"));
    verdict(ok, parts.join("; "))
}

fn c10_janson() -> Verdict {
    let all: Vec<u64> = (0..625).collect();
    let m = model(4, all, 4, 5, None, 0);
    let target = 5u64.pow(5) + 2 * 5u64.pow(4) + 3;
    match estimates::janson_empirical(&m, DeltaKind::Qn, target, 2000, 7) {
        Ok(r) => verdict(
            r.status == JansonStatus::Holds && r.delta < r.mu && r.trials == 2000,
            format!(
                "mu {:.3}, Delta {:.3}, P(count <= mu/2) {:.4} vs exp(-mu/16) {:.4} + slack {:.4}",
                r.mu, r.delta, r.p_hat, r.bound, r.slack
            ),
        ),
        Err(e) => Fail(e.to_string()),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

fn pairwise_disjoint(vs: &[Vec<u64>]) -> bool {
    (0..vs.len()).all(|i| (i + 1..vs.len()).all(|j| vs[i].iter().all(|x| !vs[j].contains(x))))
}

fn brute_sunflower(vs: &[Vec<u64>], h: usize, k: usize) -> bool {
    subsets(vs.len(), k).into_iter().any(|pick| {
        (0u32..1 << h).any(|mask| {
            let agree = (0..h)
                .filter(|&i| mask >> i & 1 == 1)
                .all(|i| pick.iter().all(|&j| vs[j][i] == vs[pick[0]][i]));
            let residual: Vec<Vec<u64>> = pick
                .iter()
                .map(|&j| (0..h).filter(|&i| mask >> i & 1 == 0).map(|i| vs[j][i]).collect())
                .collect();
            let distinct: HashSet<&Vec<u64>> = residual.iter().collect();
            agree && distinct.len() == k && pairwise_disjoint(&residual)
        })
    })
}

fn c11_detectors() -> Verdict {
    let mut rng = StdRng::seed_from_u64(11);
    let mut bad = Vec::new();
    let (mut dsv_yes, mut sf_yes) = (0, 0);
    for trial in 0..500 {
        let h = rng.random_range(1..=4);
        let size = rng.random_range(1..=10);
        let k = rng.random_range(1..=3);
        let alphabet = rng.random_range(3..=9u64);
        let mut vs: Vec<Vec<u64>> = Vec::new();
        for _ in 0..200 {
            if vs.len() == size {
                break;
            }
            let v: Vec<u64> = (0..h).map(|_| rng.random_range(0..alphabet)).collect();
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
        let fam = VectorFamily::new(h, vs.clone()).unwrap();
        let want_dsv = subsets(vs.len(), k).iter().any(|pick| {
            let chosen: Vec<Vec<u64>> = pick.iter().map(|&j| vs[j].clone()).collect();
            pairwise_disjoint(&chosen)
        });
        let got_dsv = combinat::find_k_dsv(&fam, k);
        let dsv_ok = got_dsv.is_some() == want_dsv
            && got_dsv.as_ref().is_none_or(|idx| {
                let chosen: Vec<Vec<u64>> = idx.iter().map(|&j| vs[j].clone()).collect();
                idx.len() == k && pairwise_disjoint(&chosen)
            });
        let want_sf = brute_sunflower(&vs, h, k);
        let got_sf = combinat::find_sunflower(&fam, k);
        let sf_ok = got_sf.is_some() == want_sf
            && got_sf.as_ref().is_none_or(|w| {
                let residual: Vec<Vec<u64>> = w
                    .petals
                    .iter()
                    .map(|&j| (0..h).filter(|i| !w.kernel.contains(i)).map(|i| vs[j][i]).collect())
                    .collect();
                w.kernel.len() < h
                    && w.petals.len() == k
                    && w.kernel.iter().all(|&i| w.petals.iter().all(|&j| vs[j][i] == vs[w.petals[0]][i]))
                    && pairwise_disjoint(&residual)
            });
        let bound_ok = got_sf.is_some() || (vs.len() as f64) <= combinat::sunflower_free_bound(h, k);
        dsv_yes += usize::from(want_dsv);
        sf_yes += usize::from(want_sf);
        if !(dsv_ok && sf_ok && bound_ok) {
            bad.push(trial);
        }
    }
    // trivial cases
    let mut trivial = true;
    for k in 1..=3usize {
        let singles: Vec<Vec<u64>> = (0..=k as u64).map(|x| vec![x]).collect();
        let w = combinat::find_sunflower(&VectorFamily::new(1, singles).unwrap(), k);
        trivial &= w.is_some_and(|w| w.kernel.is_empty());
    }
    let same_core = VectorFamily::new(2, vec![vec![7, 1], vec![7, 2], vec![7, 3]]).unwrap();
    trivial &= combinat::find_sunflower(&same_core, 3).is_some_and(|w| w.kernel == vec![0]);
    verdict(
        bad.is_empty() && trivial,
        format!(
            "500 families ({dsv_yes} with a K-d.s.v., {sf_yes} with a sunflower), failing trials {bad:?}, trivial cases {}",
            if trivial { "ok" } else { "broken" }
        ),
    )
}

fn fqsl_bin(args: &[&str], threads: &str) -> std::process::Output {
    Proc::new(env!("CARGO_BIN_EXE_fqsl"))
        .args(args)
        .env("FQSL_THREADS", threads)
        .output()
        .expect("fqsl runs")
}

fn c12_replay() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let sample = p("sample.json");
    let model_flags = ["--p", "5", "--N", "4", "--gamma", "7/11", "--M", "4", "--D", "7", "--seed", "3"];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(model_flags.iter()).chain(tail).map(|s| s.to_string()).collect()
    };
    let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<String>>();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("construct", owned(&["construct", "5", "1", "1", "--verify-basis3", "--verify-basis4", "--deviation-table"])),
        ("construct-gn", owned(&["construct", "5", "1", "1", "--ambient=GN"])),
        ("sample", with(&["sample"], &["--epsilon", "2/3", "--out", &sample])),
        ("lift", owned(&["lift", "--mode=b22", "--in", &sample])),
        ("count", owned(&["count", "--in", &sample])),
        ("sums", owned(&["sums", "--lemma", "basic2", "--deg-max", "6"])),
        ("expectations", with(&["expectations"], &["--kind", "q", "--target", "t^6+1", "--target", "t^7+2", "--delta", "--mc-trials", "40"])),
        ("janson-check", with(&["janson-check"], &["--kind", "q", "--target", "t^7+t^5+1", "--trials", "60"])),
        ("kdsv", with(&["kdsv"], &["--family", "v", "--k", "2", "--trials", "20"])),
        ("calibrate", owned(&["calibrate"])),
    ];
    let mut problems = Vec::new();
    for (name, args) in &runs {
        let man = p(&format!("{name}.manifest.json"));
        let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
        full.extend(["--manifest", man.as_str()]);
        let first = fqsl_bin(&full, "8");
        if first.status.code() == Some(1) || !Path::new(&man).exists() {
            problems.push(format!("{name}: {}", String::from_utf8_lossy(&first.stderr).trim()));
            continue;
        }
        let expected = if *name == "sample" { std::fs::read(&sample).unwrap() } else { first.stdout.clone() };
        for threads in ["1", "2", "5"] {
            let out = p(&format!("{name}.{threads}.out"));
            let again = fqsl_bin(&["replay", &man, "--out", &out], threads);
            let bytes = std::fs::read(&out).unwrap_or_default();
            if again.status.code() != Some(0) || bytes != expected {
                problems.push(format!("{name} at {threads} threads"));
            }
        }
    }
    verdict(
        problems.is_empty(),
        format!("{} commands replayed at 1, 2 and 5 threads; problems {problems:?}", runs.len()),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 12] = [
        ("parabola is Sidon and a basis of order 3 at q' = 25", c1_sidon_basis3),
        ("basis of order 4 at q' = 25", c2_basis4),
        ("system solution counts pinned", c3_system_counts),
        ("pullback to G_4 and iso additivity", c4_pullback),
        ("sigma direct vs closed form", c5_sigma_dual_path),
        ("degree-sum lemma ratios within pinned constants", c6_lemma_ratios),
        ("lifting post-conditions and inequalities", c7_lifting),
        ("family counters vs brute force", c8_counter_oracles),
        ("exact expectations vs Monte-Carlo, Q_n lower bound", c9_expectations),
        ("Janson lower tail", c10_janson),
        ("d.s.v. and sunflower detectors vs exhaustive search", c11_detectors),
        ("CLI replay determinism", c12_replay),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Fail(format!("panicked: {:?}", e.downcast_ref::<String>().map(String::as_str).or(e.downcast_ref::<&str>().copied()))));
        let (tag, detail) = match v {
            Pass(d) => ("PASS", d),
            Fail(d) => ("FAIL", d),
            Inconclusive(d) => ("INCONCLUSIVE", d),
        };
        if tag != "PASS" {
            failed += 1;
        }
        println!("criterion {id:>2} {tag:<12} {name}: {detail} [{:.2?}]", start.elapsed());
    }
    println!("acceptance: {failed} criteria not passing");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
