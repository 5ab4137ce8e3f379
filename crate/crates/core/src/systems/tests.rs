use std::collections::BTreeSet;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::polytope::{map_vertex, rat};

fn sys(name: &str, n: usize) -> FibredSystem {
    registry(name, n).unwrap()
}

fn mat(rows: &[&[i64]]) -> IntMatrix {
    IntMatrix::from_rows(rows).unwrap()
}

fn pt(v: &[f64]) -> ProjPoint {
    ProjPoint::new(v.to_vec()).unwrap()
}

const PRIMALS: [&str; 7] = ["gs", "selmer", "selmer-full", "brun", "brun-mult", "poincare", "flipflop"];

fn all_systems() -> Vec<FibredSystem> {
    let mut v = vec![sys("gauss", 1)];
    for n in 2..=4 {
        v.extend(PRIMALS.iter().map(|s| sys(s, n)));
        v.push(sys("flipflop-jump", n));
    }
    v
}

#[test]
fn registry_matrices() {
    assert_eq!(sys("gauss", 1).branch_matrix(&Digit::Int(2)).unwrap(), mat(&[&[0, 1], &[1, -2]]));
    assert_eq!(sys("gs", 2).branch_matrix(&Digit::Int(0)).unwrap(), mat(&[&[0, 1, 0], &[0, 0, 1], &[1, -1, 0]]));
    assert_eq!(sys("gs", 2).branch_matrix(&Digit::Int(1)).unwrap(), mat(&[&[0, 1, 0], &[0, 0, 1], &[1, -1, -1]]));
    assert_eq!(sys("selmer", 2).selfdual_digits(), Some(DigitSet::List(vec![Digit::Int(1), Digit::Int(2)])));
    assert!(matches!(registry("jacobi-perron", 2), Err(Error::UnknownAlgorithm(_))));
    assert!(matches!(registry("gauss", 2), Err(Error::UnsupportedDimension { .. })));
    assert!(matches!(registry("gs", 1), Err(Error::UnsupportedDimension { .. })));
    assert!(!sys("brun", 3).is_full());
    assert!(sys("brun-mult", 3).is_full());
}

#[test]
fn every_branch_is_unimodular() {
    for s in all_systems() {
        for d in s.probe_digits(6) {
            let m = s.branch_matrix(&d).unwrap();
            assert!(m.is_unimodular(), "{} {d}", s.name());
        }
    }
}

#[test]
fn spec_digits_and_steps() {
    assert_eq!(sys("gs", 2).digit_of(&[0.6, 0.3]).unwrap(), Digit::Int(1));
    assert_eq!(sys("selmer", 2).digit_of(&[0.8, 0.7]).unwrap(), Digit::Int(2));
    let p = sys("poincare", 2).digit_of(&[0.7, 0.2]).unwrap();
    assert_eq!(p.to_string(), "(12)");

    let (d, y) = sys("gauss", 1).step(&pt(&[0.4])).unwrap();
    assert_eq!(d, Digit::Int(2));
    assert!((y.coords()[0] - 0.5).abs() < 1e-15);

    let (d, y) = sys("gs", 2).step(&pt(&[0.6, 0.3])).unwrap();
    assert_eq!(d, Digit::Int(1));
    assert!((y.coords()[0] - 0.5).abs() < 1e-15 && (y.coords()[1] - 1.0 / 6.0).abs() < 1e-15);

    let ff = sys("flipflop", 2);
    let (d, y) = ff.step(&pt(&[0.5, 0.2])).unwrap();
    assert_eq!(d, Digit::Int(0));
    assert_eq!(ff.branch_matrix(&d).unwrap(), mat(&[&[1, 0, -1], &[0, 1, 0], &[0, 0, 1]]));
    assert!((y.coords()[0] - 0.625).abs() < 1e-15 && (y.coords()[1] - 0.25).abs() < 1e-15);
}

#[test]
fn spec_expansions() {
    let g = sys("gauss", 1);
    assert_eq!(g.expand(&pt(&[0.4]), 2).unwrap().digits, vec![Digit::Int(2), Digit::Int(2)]);
    assert!(g.expand(&pt(&[0.4]), 0).unwrap().digits.is_empty());
    // 0.4 = [0; 2, 2] terminates exactly at the third step
    let e = g.expand(&pt(&[0.4]), 5).unwrap();
    assert_eq!(e.digits.len(), 2);
    assert!(e.stopped.is_some());

    let gs = sys("gs", 2);
    let e = gs.expand(&pt(&[0.6, 0.3]), 2).unwrap();
    assert_eq!(e.digits, vec![Digit::Int(1), Digit::Int(3)]);
    assert!(matches!(gs.expand(&pt(&[0.3, 0.6]), 1), Err(Error::OutOfDomain)));
    assert!(matches!(gs.digit_of(&[0.3, 0.6]), Err(Error::OutOfDomain)));
}

#[test]
fn gauss_expansion_matches_rational_oracle() {
    // Euclid on p/q gives the exact partial quotients.
    let g = sys("gauss", 1);
    for (p, q) in [(7u64, 19u64), (13, 29), (34, 55), (100, 233)] {
        let (mut a, mut b) = (q, p);
        let mut expected = Vec::new();
        while b != 0 {
            expected.push(Digit::Int(a / b));
            (a, b) = (b, a % b);
        }
        let e = g.expand(&pt(&[p as f64 / q as f64]), expected.len() - 1).unwrap();
        assert_eq!(e.digits, expected[..expected.len() - 1]);
    }
}

#[test]
fn boundary_points_are_rejected_or_snapped() {
    let gs = sys("gs", 2);
    // 1 - x1 - 2 x2 = 0 lies on the closed side of cell 2
    assert_eq!(gs.digit_of(&[0.5, 0.25]).unwrap(), Digit::Int(2));
    assert!(matches!(gs.digit_of(&[0.5, 0.0]), Err(Error::BoundaryPoint)));
    // Poincaré ties between differences are boundary points
    assert!(matches!(sys("poincare", 2).digit_of(&[0.5, 0.25]), Err(Error::BoundaryPoint)));
    // Brun: x1 = 1 - x1 is closed on the upper cell
    assert_eq!(sys("brun", 2).digit_of(&[0.5, 0.3]).unwrap(), Digit::Int(1));
}

#[test]
fn gauss_cylinders() {
    let g = sys("gauss", 1);
    let c = g.cylinder(&[Digit::Int(2)]).unwrap();
    assert_eq!(c.map, mat(&[&[2, 1], &[1, 0]]));
    let ends = |c: &CylinderSpec| -> BTreeSet<BigRational> {
        [vec![rat(0, 1)], vec![rat(1, 1)]].iter().map(|v| map_vertex(&c.map, v).0.unwrap()[0].clone()).collect()
    };
    assert_eq!(ends(&c), [rat(1, 3), rat(1, 2)].into_iter().collect());
    // [0; 1, 2 + t] for t in [0, 1] runs from 2/3 to 3/4
    let c = g.cylinder(&[Digit::Int(1), Digit::Int(2)]).unwrap();
    assert_eq!(ends(&c), [rat(2, 3), rat(3, 4)].into_iter().collect());
    let p = g.cylinder_polytope(&c, &[]).unwrap();
    assert_eq!(p.volume(), rat(1, 12));
}

#[test]
fn single_digit_cylinder_is_inverse_branch() {
    for s in all_systems() {
        for d in s.probe_digits(3) {
            let c = match s.cylinder(std::slice::from_ref(&d)) {
                Ok(c) => c,
                Err(Error::EmptyCylinder(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(c.map, s.branch_matrix(&d).unwrap().inverse().unwrap());
            assert!((&c.map * &c.forward).is_identity());
        }
    }
}

#[test]
fn jump_branches_equal_gs() {
    for n in 2..=5 {
        let jump = sys("flipflop", n).jump().unwrap();
        let gs = sys("gs", n);
        for k in 0..=10 {
            let d = Digit::Int(k);
            assert_eq!(jump.branch_matrix(&d).unwrap(), gs.branch_matrix(&d).unwrap(), "n={n} k={k}");
        }
    }
    assert!(sys("gs", 2).jump().is_err());
}

/// Samples `count` points of the domain that are classified without error.
fn interior_samples(s: &FibredSystem, rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut x = vec![0.0; s.n()];
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 50 * count + 1000, "{} rejects too many samples", s.label());
        s.domain().sample(rng, &mut x);
        if x.iter().any(|v| *v > 1e6) {
            continue;
        }
        match s.digit_of(&x) {
            Ok(_) => out.push(x.clone()),
            Err(Error::BoundaryPoint) => {}
            Err(e) => panic!("{} at {x:?}: {e}", s.label()),
        }
    }
    out
}

#[test]
fn closure_on_both_sides() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in all_systems() {
        for side in [s.clone(), s.dualize().unwrap_or_else(|_| s.clone())] {
            for x in interior_samples(&side, &mut rng, 400) {
                let (d, y) = side.step(&pt(&x)).unwrap();
                assert!(side.domain().contains(y.coords(), 1e-9), "{} {d} {x:?} -> {y:?}", side.label());
            }
        }
    }
}

#[test]
fn cell_rules_agree_with_cell_polytopes() {
    // digit_of(x) = d exactly when x satisfies the cell inequalities of d
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for s in all_systems() {
        let probe = s.probe_digits(40);
        for x in interior_samples(&s, &mut rng, 200) {
            let d = s.digit_of(&x).unwrap();
            let hits: Vec<&Digit> = probe
                .iter()
                .filter(|e| {
                    s.cell_constraints(e).unwrap().iter().all(|c| {
                        let v = c.form.eval(&x);
                        if c.strict {
                            v > 0.0
                        } else {
                            v >= 0.0
                        }
                    })
                })
                .collect();
            if s.algorithm() == Algorithm::FlipFlopJump || matches!(d, Digit::Int(k) if k > 40) {
                continue;
            }
            if matches!(d, Digit::Pair(_, nn) if nn > 40) {
                continue;
            }
            assert_eq!(hits, vec![&d], "{} at {x:?}", s.label());
        }
    }
}

#[test]
fn round_trip_and_orbit_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for s in all_systems() {
        for x in interior_samples(&s, &mut rng, 100) {
            let depth = rng.gen_range(1..=4);
            let e = s.expand(&pt(&x), depth).unwrap();
            if e.stopped.is_some() || e.digits.len() < depth {
                continue;
            }
            // huge partial quotients amplify round-off along the orbit
            let large = e.digits.iter().any(|d| matches!(d, Digit::Int(k) | Digit::Pair(_, k) if *k > 200));
            if large {
                continue;
            }
            let cyl = match s.cylinder(&e.digits) {
                Ok(c) => c,
                Err(err) => panic!("{} {:?}: {err}", s.label(), e.digits),
            };
            let back = cyl.map.act(&e.point).unwrap();
            let fwd = cyl.forward.act(&pt(&x)).unwrap();
            for i in 0..s.n() {
                let scale = 1.0 + x[i].abs();
                assert!((back.coords()[i] - x[i]).abs() < 1e-9 * scale, "{} {:?}", s.label(), e.digits);
                let t = e.point.coords()[i];
                assert!((fwd.coords()[i] - t).abs() < 1e-10 * (1.0 + t.abs()) * 1e3, "{} {:?}", s.label(), e.digits);
            }
            assert!(s.cylinder_contains(&cyl, &x).unwrap());
        }
    }
}

#[test]
fn full_branches_are_onto_exactly() {
    // For a full system the forward branch sends the vertices of the closed
    // cell onto the vertices of the domain.
    for s in all_systems() {
        if !s.is_full() {
            continue;
        }
        let domain: BTreeSet<Vec<BigRational>> = s.domain().polytope().unwrap().vertices().iter().cloned().collect();
        for d in s.probe_digits(4) {
            let cyl = s.cylinder(std::slice::from_ref(&d)).unwrap();
            let cell = s.cylinder_polytope(&cyl, &[]).unwrap();
            let image: BTreeSet<Vec<BigRational>> =
                cell.vertices().iter().map(|v| map_vertex(&cyl.forward, v).0.unwrap()).collect();
            assert_eq!(image, domain, "{} digit {d}", s.label());
        }
    }
}

#[test]
fn full_branches_are_onto_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for s in all_systems() {
        if !s.is_full() {
            continue;
        }
        for d in s.probe_digits(5) {
            let v = s.branch_matrix(&d).unwrap().inverse().unwrap();
            let mut ok = 0;
            let ys = interior_samples(&s, &mut rng, 100);
            for y in &ys {
                let x = v.act(&pt(y)).unwrap();
                if s.digit_of(x.coords()).ok() == Some(d.clone()) {
                    ok += 1;
                }
            }
            assert!(ok >= 99, "{} {d}: {ok}/100", s.label());
        }
    }
}

#[test]
fn non_full_cylinders_can_be_empty() {
    let full = sys("selmer-full", 2);
    // Δ(2) maps into Δ(1) ∪ Δ(2), never into Δ(0)
    assert!(matches!(full.cylinder(&[Digit::Int(2), Digit::Int(0)]), Err(Error::EmptyCylinder(_))));
    assert!(full.cylinder(&[Digit::Int(0), Digit::Int(2)]).is_ok());
}

#[test]
fn selmer_transition_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 2..=4 {
        let s = sys("selmer-full", n);
        for x in interior_samples(&s, &mut rng, 3000) {
            let (i, y) = s.step(&pt(&x)).unwrap();
            let Ok(j) = s.digit_of(y.coords()) else { continue };
            let (i, j) = (i.as_int().unwrap() as usize, j.as_int().unwrap() as usize);
            if i < n {
                assert!(j >= i, "n={n}: {i} -> {j}");
            } else {
                assert!(j + 1 >= n, "n={n}: {i} -> {j}");
            }
        }
    }
}

#[test]
fn poincare_digit_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for n in 2..=5 {
        let s = sys("poincare", n);
        for x in interior_samples(&s, &mut rng, 300) {
            let tau = s.digit_of(&x).unwrap();
            let tau = tau.as_perm().unwrap();
            let mut d = vec![1.0 - x[0]];
            d.extend((1..n).map(|j| x[j - 1] - x[j]));
            d.push(x[n - 1]);
            let mut sorted = vec![0.0; n + 1];
            for j in 1..=n + 1 {
                sorted[tau.apply(j) - 1] = d[j - 1];
            }
            assert!(sorted.windows(2).all(|w| w[0] > w[1]));
            let unsorted: Vec<f64> = (1..=n + 1).map(|j| sorted[tau.apply(j) - 1]).collect();
            assert_eq!(unsorted, d);
        }
    }
}

#[test]
fn poincare_image_is_normalized_sorted_differences() {
    let s = sys("poincare", 2);
    let (_, y) = s.step(&pt(&[0.7, 0.2])).unwrap();
    // differences (0.3, 0.5, 0.2) sorted to (0.5, 0.3, 0.2), divided by the largest
    assert!((y.coords()[0] - 0.6).abs() < 1e-12);
    assert!((y.coords()[1] - 0.4).abs() < 1e-12);
}

#[test]
fn jump_digits_agree_with_gs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 2..=4 {
        let gs = sys("gs", n);
        let jump = sys("flipflop", n).jump().unwrap();
        for side in [false, true] {
            let (a, b) = if side { (gs.dualize().unwrap(), jump.dualize().unwrap()) } else { (gs.clone(), jump.clone()) };
            for x in interior_samples(&a, &mut rng, 300) {
                match b.digit_of(&x) {
                    Ok(d) => assert_eq!(d, a.digit_of(&x).unwrap(), "n={n} dual={side} {x:?}"),
                    Err(Error::BoundaryPoint) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

#[test]
fn dual_partitions_match_closed_forms() {
    let gs = sys("gs", 3).dualize().unwrap();
    assert_eq!(gs.digit_of(&[5.0, 2.0, 0.3]).unwrap(), Digit::Int(6));
    let (_, y) = sys("gs", 2).dualize().unwrap().step(&pt(&[0.9, 0.4])).unwrap();
    // ((1 − x₂)/x₂, (x₁ − k x₂)/x₂) with k = 2
    assert!((y.coords()[0] - 1.5).abs() < 1e-12 && (y.coords()[1] - 0.25).abs() < 1e-12);
    let sel = sys("selmer", 3).dualize().unwrap();
    assert_eq!(sel.digit_of(&[4.0, 1.0, 2.0]).unwrap(), Digit::Int(2));
    assert_eq!(sel.digit_of(&[4.0, 2.0, 1.0]).unwrap(), Digit::Int(3));
    assert!(matches!(sel.digit_of(&[4.0, 2.0, 2.0]), Err(Error::BoundaryPoint)));
    let brun = sys("brun", 3).dualize().unwrap();
    assert_eq!(brun.digit_of(&[1.5, 0.2, 0.9]).unwrap(), Digit::Int(0));
    assert_eq!(brun.digit_of(&[0.5, 0.2, 0.9]).unwrap(), Digit::Int(3));
    assert_eq!(sys("gauss", 1).dualize().unwrap().digit_of(&[0.4]).unwrap(), Digit::Int(2));
    let g = sys("gauss", 1);
    let gd = g.dualize().unwrap();
    assert_eq!(gd.branch_matrix(&Digit::Int(4)).unwrap(), g.branch_matrix(&Digit::Int(4)).unwrap());
    let back = gd.dualize().unwrap();
    assert_eq!(back.side(), Side::Primal);
    assert!(sys("selmer-full", 2).dualize().is_err());
}

#[test]
fn digit_parsing() {
    let p = sys("poincare", 2);
    let ds = p.parse_digits("(12),(123)").unwrap();
    assert_eq!(format_digits(&ds), "(12),(123)");
    assert_eq!(p.parse_digits("e (13)").unwrap().len(), 2);
    let bm = sys("brun-mult", 2);
    assert_eq!(bm.parse_digits("1:1,2:1").unwrap(), vec![Digit::Pair(1, 1), Digit::Pair(2, 1)]);
    assert_eq!(bm.parse_digits("(1,1),(2,1)").unwrap(), vec![Digit::Pair(1, 1), Digit::Pair(2, 1)]);
    assert!(bm.parse_digits("3:1").is_err());
    assert_eq!(sys("flipflop", 2).parse_digits("S,B").unwrap(), vec![Digit::Int(0), Digit::Int(1)]);
    assert!(sys("selmer", 2).parse_digits("0").is_err());
    assert!(sys("gauss", 1).parse_digits("0").is_err());
}

#[test]
fn w0_coset_membership() {
    let set = DigitSet::W0Coset;
    let inside: Vec<String> = Permutation::all(3)
        .into_iter()
        .filter(|p| set.contains(&Digit::Perm(p.clone())))
        .map(|p| p.to_string())
        .collect();
    let mut inside = inside;
    inside.sort();
    assert_eq!(inside, vec!["(123)", "(13)", "(132)", "e"]);
}
