use blochsig::linalg::{anticommutator, c, commutator, identity, max_abs, CMatrix, I};
use blochsig::su_basis::{build_generators, structure_constants};
use blochsig::Qudit;
use proptest::prelude::*;

fn jacobi_residual(n: usize) -> f64 {
    let q = Qudit::new(n).unwrap();
    let sc = q.constants();
    let m = q.coords();
    let mut worst = 0.0_f64;
    for a in 0..m {
        for b in 0..m {
            for cc in 0..m {
                for e in 0..m {
                    let s: f64 = (0..m)
                        .map(|d| {
                            sc.f(a, b, d) * sc.f(d, cc, e)
                                + sc.f(b, cc, d) * sc.f(d, a, e)
                                + sc.f(cc, a, d) * sc.f(d, b, e)
                        })
                        .sum();
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

#[test]
fn jacobi_identity_holds() {
    for n in 2..=4 {
        assert!(jacobi_residual(n) <= 1e-11, "N={n}");
    }
}

#[test]
fn product_rule_reconstructs_every_pair() {
    // σᵢσⱼ = (2/N)δᵢⱼ I + Σₖ zᵢⱼₖ σₖ
    for n in 2..=4 {
        let basis = build_generators(n).unwrap();
        let sc = structure_constants(&basis);
        let m = basis.len();
        for i in 0..m {
            for j in 0..m {
                let mut rhs: CMatrix = identity(n) * c(if i == j { 2.0 / n as f64 } else { 0.0 });
                for k in 0..m {
                    rhs += basis.get(k) * sc.z(i, j, k);
                }
                let lhs = basis.get(i) * basis.get(j);
                assert!(max_abs(&(lhs - rhs)) <= 1e-12, "N={n} ({i},{j})");
            }
        }
    }
}

#[test]
fn commutators_and_anticommutators_close() {
    let basis = build_generators(3).unwrap();
    let sc = structure_constants(&basis);
    for i in 0..8 {
        for j in 0..8 {
            let mut comm = CMatrix::zeros(3, 3);
            let mut anti: CMatrix = identity(3) * c(if i == j { 4.0 / 3.0 } else { 0.0 });
            for k in 0..8 {
                comm += basis.get(k) * (I * c(2.0 * sc.f(i, j, k)));
                anti += basis.get(k) * c(2.0 * sc.g(i, j, k));
            }
            assert!(max_abs(&(commutator(basis.get(i), basis.get(j)) - comm)) <= 1e-12);
            assert!(max_abs(&(anticommutator(basis.get(i), basis.get(j)) - anti)) <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f_is_totally_antisymmetric_and_g_symmetric(n in 2usize..=4, i in 0usize..15, j in 0usize..15, k in 0usize..15) {
        let q = Qudit::new(n).unwrap();
        let m = q.coords();
        let (i, j, k) = (i % m, j % m, k % m);
        let sc = q.constants();
        prop_assert!((sc.f(i, j, k) + sc.f(j, i, k)).abs() <= 1e-13);
        prop_assert!((sc.f(i, j, k) - sc.f(j, k, i)).abs() <= 1e-13);
        prop_assert!((sc.g(i, j, k) - sc.g(j, i, k)).abs() <= 1e-13);
        prop_assert!((sc.g(i, j, k) - sc.g(k, j, i)).abs() <= 1e-13);
    }

    #[test]
    fn combine_and_traces_are_inverse(n in 2usize..=4, seed in any::<u64>()) {
        let q = Qudit::new(n).unwrap();
        let coeffs = blochsig::random::gaussian_vector(q.coords(), 1.0, &mut blochsig::random::stream_rng(seed, 0));
        let m = q.basis().combine(&coeffs);
        let back: Vec<f64> = q.basis().traces(&m).iter().map(|t| t.re / 2.0).collect();
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
