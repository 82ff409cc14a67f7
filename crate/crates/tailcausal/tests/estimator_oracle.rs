//! The estimator against the independently written reference in
//! `common`, exhaustively over small instances, plus the exact
//! rank-invariance property that everything downstream leans on.

mod common;

use common::{draw, reference_gamma};
use tailcausal::estimator::{causal_tail_estimate, DivisorMode, GammaVariant};
use tailcausal::rng::RngState;
use tailcausal::series::Series;

const VARIANTS: [GammaVariant; 3] = [
    GammaVariant::Standard,
    GammaVariant::NoInstantaneous,
    GammaVariant::AbsoluteValue,
];
const DIVISORS: [DivisorMode; 2] = [DivisorMode::PaperK, DivisorMode::Renormalize];

fn series(values: &[f64]) -> Series {
    Series::new("s", values.to_vec()).unwrap()
}

/// Every n <= 12, three data flavors per side, three draws each, with p and
/// k grids that reach past both ends of the valid range. Values must agree
/// bit for bit, errors variant for variant.
#[test]
fn agrees_with_the_reference_on_every_small_instance() {
    let mut rng = RngState::new(401);
    let mut compared = 0usize;
    for n in 3..=12usize {
        for flavor_x in 0..3 {
            for flavor_y in 0..3 {
                for _ in 0..3 {
                    let x = draw(&mut rng, n, flavor_x);
                    let y = draw(&mut rng, n, flavor_y);
                    let (sx, sy) = (series(&x), series(&y));
                    for p in [0, 1, 2, 3, n - 1, n] {
                        for k in [0, 1, 2, n / 2, n - 1, n, n + 1] {
                            for variant in VARIANTS {
                                for divisor in DIVISORS {
                                    let ctx = format!(
                                        "n={n} p={p} k={k} {variant:?} {divisor:?} x={x:?} y={y:?}"
                                    );
                                    let got = causal_tail_estimate(&sx, &sy, p, k, variant, divisor);
                                    match (got, reference_gamma(&x, &y, p, k, variant, divisor)) {
                                        (Ok(est), Ok((value, count))) => {
                                            assert_eq!(
                                                est.value.to_bits(),
                                                value.to_bits(),
                                                "{} vs {value}: {ctx}",
                                                est.value
                                            );
                                            assert_eq!(est.selected_count, count, "{ctx}");
                                            assert!(
                                                (0.0..=1.0).contains(&est.value),
                                                "{}: {ctx}",
                                                est.value
                                            );
                                        }
                                        (Err(a), Err(b)) => assert_eq!(a, b, "{ctx}"),
                                        (got, want) => {
                                            panic!("disagree: {got:?} vs {want:?}: {ctx}")
                                        }
                                    }
                                    compared += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(compared > 50_000, "only {compared} comparisons ran");
}

/// Strictly increasing maps of either series leave the estimate bit-
/// identical: the statistic sees ranks, never magnitudes. The affine map
/// checks the plain variants; the odd cubic also commutes with |.|, so it
/// covers AbsoluteValue too.
#[test]
fn estimates_depend_on_ranks_only() {
    let mut rng = RngState::new(402);
    let n = 250;
    let x: Vec<f64> = (0..n).map(|_| (rng.uniform() - 0.5) * 6.0).collect();
    let y: Vec<f64> = (0..n).map(|_| (rng.uniform() - 0.5) * 6.0).collect();
    let affine = |v: &f64| 2.0 * v + 1.0;
    let cubic = |v: &f64| v * v * v;
    let mapped = |v: &[f64], f: &dyn Fn(&f64) -> f64| series(&v.iter().map(f).collect::<Vec<_>>());

    for (p, k) in [(0, 1), (2, 15), (3, 40), (5, n)] {
        for variant in VARIANTS {
            if variant == GammaVariant::NoInstantaneous && p == 0 {
                continue;
            }
            for divisor in DIVISORS {
                let ctx = format!("p={p} k={k} {variant:?} {divisor:?}");
                let base = causal_tail_estimate(&series(&x), &series(&y), p, k, variant, divisor)
                    .unwrap();
                let mut transformed = vec![
                    causal_tail_estimate(&mapped(&x, &cubic), &series(&y), p, k, variant, divisor),
                    causal_tail_estimate(&series(&x), &mapped(&y, &cubic), p, k, variant, divisor),
                    causal_tail_estimate(&mapped(&x, &cubic), &mapped(&y, &cubic), p, k, variant, divisor),
                ];
                if variant != GammaVariant::AbsoluteValue {
                    transformed.push(causal_tail_estimate(
                        &mapped(&x, &affine),
                        &mapped(&y, &affine),
                        p,
                        k,
                        variant,
                        divisor,
                    ));
                }
                for est in transformed {
                    let est = est.unwrap();
                    assert_eq!(
                        est.value.to_bits(),
                        base.value.to_bits(),
                        "{} vs {}: {ctx}",
                        est.value,
                        base.value
                    );
                    assert_eq!(est.selected_count, base.selected_count, "{ctx}");
                }
            }
        }
    }
}
