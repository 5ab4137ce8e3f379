//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary
//! (`harness = false`) so the lines print even when everything passes.

use std::time::{Duration, Instant};

use mcf_core::duality::{self, Intertwiner};
use mcf_core::figure::{render_figure, FigureSpec};
use mcf_core::measure::{self, MeasureParams, Verdict};
use mcf_core::systems::{format_digits, DigitSet};
use mcf_core::{registry, Digit, Error, FibredSystem, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 42;
const MILLION: u64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sys(name: &str, n: usize) -> FibredSystem {
    registry(name, n).unwrap()
}

fn perm(s: &str, m: usize) -> Digit {
    Digit::Perm(Permutation::parse_cycles(s, m).unwrap())
}

/// A point of the domain that the system can classify.
fn interior(s: &FibredSystem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = vec![0.0; s.n()];
    loop {
        s.domain().sample(rng, &mut x);
        if x.iter().all(|v| *v < 1e6) && s.digit_of(&x).is_ok() {
            return x;
        }
    }
}

fn kernel_identity() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut systems = vec![sys("gauss", 1)];
    for n in 2..=4 {
        for name in ["gs", "selmer", "brun", "brun-mult", "poincare", "flipflop"] {
            systems.push(sys(name, n));
        }
    }
    let mut worst: f64 = 0.0;
    for s in &systems {
        let alphabet = s.probe_digits(10);
        let dual = s.dual_domain().unwrap();
        let mut y = vec![0.0; s.n()];
        for _ in 0..1000 {
            let x = interior(s, &mut rng);
            loop {
                dual.sample(&mut rng, &mut y);
                if y.iter().all(|v| *v < 1e6) {
                    break;
                }
            }
            let len = rng.gen_range(1..=3);
            let digits: Vec<Digit> = (0..len).map(|_| alphabet.choose(&mut rng).unwrap().clone()).collect();
            worst = worst.max(measure::kernel_duality_residual(s, &digits, &x, &y).unwrap());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 120.0,
        format!("{} systems x 1000 draws, max residual {worst:.2e} (< 1e-10), {secs:.1}s (< 120s)", systems.len()),
    )
}

fn gauss_ground_truth() -> Outcome {
    let g = sys("gauss", 1);
    let h0 = measure::density(&g, &[0.5]).unwrap() * 1.5;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let x = (i as f64 + 0.5) / 100.0;
        let ratio = measure::density(&g, &[x]).unwrap() * (1.0 + x) / h0;
        worst = worst.max((ratio - 1.0).abs());
    }
    let p = MeasureParams::default().with_samples(MILLION).with_seed(SEED);
    let mut zs = Vec::new();
    for a in 1..=5u64 {
        let exact = ((1.0 + 1.0 / a as f64) / (1.0 + 1.0 / (a as f64 + 1.0))).ln();
        let e = measure::cylinder_measure(&g, &[Digit::Int(a)], &p).unwrap();
        zs.push((e.value - exact).abs() / e.stderr);
    }
    let zmax = zs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst < 1e-12 && zmax <= 3.0,
        format!("density ratio error {worst:.1e} (< 1e-12); cylinders a=1..5 max |z| {zmax:.2} (<= 3)"),
    )
}

fn commutes(s: &FibredSystem, phi: &Intertwiner, probe: &[Digit]) -> (usize, usize) {
    let r = duality::verify_commutation(s, phi, probe).unwrap();
    (r.iter().filter(|c| c.pass).count(), r.len())
}

fn intertwiner_exactness() -> Outcome {
    let mut checked = 0;
    let mut failed = Vec::new();
    let mut tally = |label: String, (ok, total): (usize, usize)| {
        checked += total;
        if ok != total {
            failed.push(format!("{label}: {}/{total}", total - ok));
        }
    };
    for n in 2..=6 {
        let s = sys("gs", n);
        let phi = duality::known_intertwiner("gs", n).unwrap();
        tally(format!("gs n={n}"), commutes(&s, &phi, &s.probe_digits(50)));
        let s = sys("selmer", n);
        let phi = duality::known_intertwiner("selmer", n).unwrap();
        tally(format!("selmer n={n}"), commutes(&s, &phi, &s.probe_digits(0)));
    }
    for n in 2..=4 {
        let s = sys("poincare", n);
        let phi = duality::known_intertwiner("poincare", n).unwrap();
        let coset: Vec<Digit> = duality::w0_coset(n + 1).into_iter().map(Digit::Perm).collect();
        tally(format!("poincare n={n}"), commutes(&s, &phi, &coset));
    }
    for n in 2..=5 {
        let s = sys("flipflop", n);
        let phi = duality::known_intertwiner("flipflop", n).unwrap();
        tally(format!("flipflop n={n}"), commutes(&s, &phi, &s.probe_digits(0)));
    }
    let g = sys("gauss", 1);
    let phi = duality::known_intertwiner("gauss", 1).unwrap();
    tally("gauss".into(), commutes(&g, &phi, &g.probe_digits(50)));

    let p = sys("poincare", 2);
    let phi = duality::known_intertwiner("poincare", 2).unwrap();
    let (ok, _) = commutes(&p, &phi, &[perm("(12)", 3)]);
    let negative = ok == 0;
    outcome(
        failed.is_empty() && negative,
        format!(
            "{checked} exact checks, failures: {}; poincare (12) n=2 fails as expected: {negative}",
            if failed.is_empty() { "none".to_string() } else { failed.join(", ") }
        ),
    )
}

fn cell_mapping() -> Outcome {
    let samples = 10_000;
    let mut cases: Vec<(FibredSystem, Digit)> = Vec::new();
    for n in 2..=3 {
        cases.extend((0..=10).map(|k| (sys("gs", n), Digit::Int(k))));
    }
    for n in 2..=4 {
        let s = sys("selmer", n);
        cases.extend(s.probe_digits(0).into_iter().map(|d| (s.clone(), d)));
    }
    let p = sys("poincare", 2);
    cases.extend(duality::w0_coset(3).into_iter().map(|d| (p.clone(), Digit::Perm(d))));
    let mut bad = Vec::new();
    for (i, (s, d)) in cases.iter().enumerate() {
        let phi = duality::known_intertwiner(s.name(), s.n()).unwrap();
        let m = duality::verify_cell_mapping(s, &phi, d, samples, SEED + i as u64).unwrap();
        if !m.pass() {
            bad.push(format!("{} {d}: {:?}/{:?}", s.label(), m.forward, m.inverse));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} cells x {samples} samples each way, 100% containment: {}", cases.len(), if bad.is_empty() { "all".into() } else { bad.join("; ") }),
    )
}

fn strings(tokens: &[Digit], len: usize) -> Vec<Vec<Digit>> {
    (0..len).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|p| {
                tokens.iter().map(move |t| {
                    let mut q = p.clone();
                    q.push(t.clone());
                    q
                })
            })
            .collect()
    })
}

fn symmetry_in_measure() -> Outcome {
    let p = MeasureParams::default().with_samples(MILLION).with_seed(SEED);
    let mut cases: Vec<(FibredSystem, Vec<Digit>)> = Vec::new();
    let gs = sys("gs", 2);
    cases.extend(strings(&[Digit::Int(0), Digit::Int(1), Digit::Int(2)], 2).into_iter().map(|d| (gs.clone(), d)));
    let sel = sys("selmer", 2);
    for len in 1..=3 {
        cases.extend(strings(&[Digit::Int(1), Digit::Int(2)], len).into_iter().map(|d| (sel.clone(), d)));
    }
    let pc = sys("poincare", 2);
    let coset: Vec<Digit> = ["e", "(13)", "(123)", "(132)"].iter().map(|s| perm(s, 3)).collect();
    cases.extend(strings(&coset, 2).into_iter().map(|d| (pc.clone(), d)));

    let mut zmax: f64 = 0.0;
    let mut worst = String::new();
    let mut divergent = Vec::new();
    let mut bad = Vec::new();
    let mut tested = 0;
    for (s, d) in &cases {
        match measure::symmetry_test(s, d, &p) {
            Ok(v) => {
                tested += 1;
                if v.z > zmax {
                    zmax = v.z;
                    worst = format!("{} [{}]", s.name(), format_digits(d));
                }
                if v.z > 3.0 {
                    bad.push(format!("{} [{}] z={:.2}", s.name(), format_digits(d), v.z));
                }
            }
            // both orientations of an infinite-measure cylinder diverge; there
            // is nothing to compare
            Err(Error::DivergentIntegral(_)) => {
                let rev: Vec<Digit> = d.iter().rev().cloned().collect();
                let both = matches!(measure::check_integrable(s, &s.cylinder(&rev).unwrap()), Err(Error::DivergentIntegral(_)));
                if both {
                    divergent.push(format!("[{}]", format_digits(d)));
                } else {
                    bad.push(format!("{} [{}] diverges one way only", s.name(), format_digits(d)));
                }
            }
            Err(e) => bad.push(format!("{} [{}]: {e}", s.name(), format_digits(d))),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{tested} strings, max z {zmax:.2} at {worst} (<= 3); skipped as divergent both ways: {}{}",
            if divergent.is_empty() { "none".into() } else { divergent.join(" ") },
            if bad.is_empty() { String::new() } else { format!("; over: {}", bad.join(", ")) }
        ),
    )
}

fn poincare_asymmetry() -> Outcome {
    let started = Instant::now();
    let p = MeasureParams::default().with_samples(10 * MILLION).with_seed(SEED);
    let s = sys("poincare", 2);
    let v = measure::symmetry_test(&s, &[perm("(12)", 3), perm("(123)", 3)], &p).unwrap();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        v.z > 5.0 && v.verdict == Verdict::Violated && secs < 300.0,
        format!(
            "mu[(12),(123)] = {:.6} +- {:.1e}, mu[(123),(12)] = {:.6} +- {:.1e}, z = {:.1} (> 5), {secs:.1}s (< 300s)",
            v.forward.value, v.forward.stderr, v.reversed.value, v.reversed.stderr, v.z
        ),
    )
}

fn jump_identity() -> Outcome {
    let mut mismatches = 0;
    for n in 2..=5 {
        let ff = sys("flipflop", n);
        let s = ff.branch_matrix(&Digit::Int(0)).unwrap();
        let b = ff.branch_matrix(&Digit::Int(1)).unwrap();
        let gs = sys("gs", n);
        for k in 0..=10u32 {
            if &b * &s.pow(k) != gs.branch_matrix(&Digit::Int(k as u64)).unwrap() {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("B*S^k == GS(k) for n=2..5, k=0..10: {mismatches} mismatches"))
}

fn telephone() -> Outcome {
    let counts: Vec<usize> = (1..=6).map(|m| duality::involutions(m).len()).collect();
    let criterion: Vec<bool> = (2..=5).map(|m| duality::involution_criterion_check(m).unwrap()).collect();
    outcome(
        counts == [1, 2, 4, 10, 26, 76] && criterion.iter().all(|c| *c),
        format!("involution counts {counts:?}; criterion m=2..5 {criterion:?}"),
    )
}

fn search_recovery() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, bound, probe) in [("gs", 1, (0..=5).map(Digit::Int).collect::<Vec<_>>()), ("selmer", 2, vec![Digit::Int(1), Digit::Int(2)])] {
        let s = sys(name, 2);
        let started = Instant::now();
        let out = duality::search_intertwiner(&s, bound, &probe, 2_000, SEED).unwrap();
        let t = started.elapsed();
        let known = duality::known_intertwiner(name, 2).unwrap().matrix().unwrap().clone();
        let top = out.candidates[0].cell_fraction;
        let found = out.candidates.iter().any(|c| c.matrix == known && c.cell_fraction == top);
        // every returned candidate must commute on the probe, checked again here
        let sound = out.candidates.iter().all(|c| {
            let phi = Intertwiner::from_matrix(&s, c.matrix.clone(), DigitSet::All).unwrap();
            duality::verify_commutation(&s, &phi, &probe).unwrap().iter().all(|r| r.pass)
        });
        ok &= found && sound && t < Duration::from_secs(60);
        parts.push(format!(
            "{name} n=2 bound {bound}: {} candidates, known matrix top-ranked {found}, sound {sound}, {:.2}s",
            out.candidates.len(),
            t.as_secs_f64()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn brun_closed_form() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 3..=4 {
        let primal = sys("brun", n);
        let dual = primal.dualize().unwrap();
        let phi = duality::known_intertwiner("brun", n).unwrap();
        let r = duality::functional_residual(&primal, &dual, &phi, &Digit::Int(0), 10_000, SEED).unwrap();
        ok &= r < 1e-10;
        parts.push(format!("n={n} residual {r:.1e}"));
    }
    outcome(ok, format!("{} (< 1e-10, 10^4 samples)", parts.join(", ")))
}

fn brun_mult_report() -> Outcome {
    let s = sys("brun-mult", 2);
    let d = s.parse_digits("1:1,2:1").unwrap();
    let p = MeasureParams::default().with_samples(MILLION).with_seed(SEED);
    match measure::symmetry_test(&s, &d, &p) {
        Ok(v) => {
            let (rf, rr) = (v.forward.relative_stderr(), v.reversed.relative_stderr());
            outcome(
                rf < 1e-3 && rr < 1e-3,
                format!(
                    "mu[1:1,2:1] = {:.6} (rel {rf:.1e}), mu[2:1,1:1] = {:.6} (rel {rr:.1e}), z = {:.1}, verdict {:?} (recorded, not asserted)",
                    v.forward.value, v.reversed.value, v.z, v.verdict
                ),
            )
        }
        Err(e) => outcome(false, format!("no report: {e}")),
    }
}

fn figures() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, want) in [("gs", vec!["0", "1", "2"]), ("selmer", vec!["0", "1", "2"]), ("poincare", vec!["e", "(23)", "(12)", "(123)", "(132)", "(13)"])] {
        let f = render_figure(&FigureSpec::new(name, 1)).unwrap();
        let mut labels: Vec<&str> = f.cells.iter().filter(|c| !c.tail).map(|c| c.label.as_str()).collect();
        let mut want = want.clone();
        labels.sort();
        want.sort();
        let good = labels == want && f.tiling_error < 1e-3;
        ok &= good;
        parts.push(format!("{name}: {} cells, tiling error {:.1e}", labels.len(), f.tiling_error));
    }
    let s2 = render_figure(&FigureSpec::new("selmer", 2)).unwrap();
    let mut l2 = s2.labels();
    l2.sort();
    ok &= l2 == ["11", "12", "21", "22"];
    parts.push(format!("selmer s=2: {}", l2.join(" ")));
    outcome(ok, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("kernel duality identity", kernel_identity),
        ("Gauss ground truth", gauss_ground_truth),
        ("intertwiner exactness", intertwiner_exactness),
        ("cell mapping", cell_mapping),
        ("symmetry in measure", symmetry_in_measure),
        ("Poincare asymmetry", poincare_asymmetry),
        ("jump identity", jump_identity),
        ("telephone numbers", telephone),
        ("search recovery", search_recovery),
        ("Brun cell-0 functional intertwiner", brun_closed_form),
        ("Brun multiplicative report", brun_mult_report),
        ("figures", figures),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let o = f();
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, id, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
