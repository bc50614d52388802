use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DVector;
use num_complex::Complex64;
use qsvt::algorithms::*;
use qsvt::block_encoding::{extract_block, max_abs, ComplexMatrix, ComplexVector};
use qsvt::phase_solver::SolverOptions;
use qsvt::poly_approx::solve_truncation;
use qsvt::QsvtError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn diag(v: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i]) } else { c(0.0) })
}

fn uniform(n: usize) -> ComplexVector {
    DVector::from_element(n, c(1.0 / (n as f64).sqrt()))
}

fn basis(n: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[k] = c(1.0);
    v
}

/// Taylor series with scaling and squaring.
fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
    let b = a * c(0.5f64.powi(s));
    let mut term = ComplexMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &b * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn phase_aligned_error(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    let phase = Complex64::from_polar(1.0, -overlap.arg());
    max_abs(&(b * phase - a))
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = (&m + m.adjoint()) * c(0.5);
    let s = h.clone().singular_values().max();
    h * c(norm / s)
}

#[test]
fn bernoulli_counts() {
    assert_eq!(bernoulli_sample_count(0.0, 1.0, (-1.0f64).exp()).unwrap(), 2);
    assert_eq!(bernoulli_sample_count(0.0, 0.5, 0.05).unwrap(), 24);
    assert!(bernoulli_sample_count(0.5, 0.5, 0.1).is_err());
    assert!(bernoulli_sample_count(0.1, 0.6, 0.0).is_err());
}

#[test]
fn bernoulli_empirical_error() {
    let (a, b, delta) = (0.1, 0.6, 0.05);
    let n = bernoulli_sample_count(a, b, delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut wrong = 0;
    let trials = 2000;
    for t in 0..trials {
        let truth_b = t % 2 == 0;
        let p = if truth_b { b } else { a };
        let hits = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
        if bernoulli_decide(hits, n, a, b) != truth_b {
            wrong += 1;
        }
    }
    assert!(wrong as f64 / trials as f64 <= delta);
}

#[test]
fn search_exact_amplitude() {
    for q in [1u32, 2, 4] {
        let prog = SearchProgram::new(q, 0.1, None, &SolverOptions::default()).unwrap();
        assert!(prog.marked_amplitude() >= 1.0 - 0.05, "N=2^{q}: {}", prog.marked_amplitude());
        let rec = prog.run(1, Mode::Exact).unwrap();
        assert_eq!(rec.decision["found"], 1);
    }
}

#[test]
fn search_sampled_success_rate() {
    let prog = SearchProgram::new(2, 0.1, None, &SolverOptions::default()).unwrap();
    let hits = (0..500).filter(|&s| prog.run(2, Mode::Sampled(s)).unwrap().decision["found"] == 2).count();
    assert!(hits as f64 / 500.0 >= 0.9, "{hits}");
}

#[test]
fn search_rejects_bad_input() {
    assert!(SearchProgram::new(2, 0.1, Some(1.5), &SolverOptions::default()).is_err());
    let prog = SearchProgram::new(2, 0.1, None, &SolverOptions::default()).unwrap();
    assert!(prog.run(4, Mode::Exact).is_err());
}

#[test]
fn runs_replay() {
    let a = qsvt_search(3, 5, 0.1, None, Mode::Sampled(11)).unwrap();
    let b = qsvt_search(3, 5, 0.1, None, Mode::Sampled(11)).unwrap();
    assert_eq!(a, b);
    let back = RunRecord::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
}

fn threshold_params() -> ThresholdParams {
    ThresholdParams { alpha: 1.0, lambda_th: 0.5, delta_lambda: 0.1, zeta: FRAC_1_SQRT_2, delta: 0.1, epsilon: None }
}

#[test]
fn threshold_repetition_count() {
    let prob = ThresholdProblem::new(&diag(&[0.2, 0.8]), threshold_params(), &SolverOptions::default()).unwrap();
    assert_eq!(prob.repetitions, 42);
    assert!((prob.epsilon - FRAC_1_SQRT_2 / 4.0).abs() < 1e-15);
}

#[test]
fn threshold_low_case() {
    let prob = ThresholdProblem::new(&diag(&[0.2, 0.8]), threshold_params(), &SolverOptions::default()).unwrap();
    let psi = uniform(2);
    let p0 = prob.p_zero(&psi).unwrap();
    let z = FRAC_1_SQRT_2;
    assert!(p0 >= z * z * (1.0 - z / 4.0), "{p0}");
    let right = (0..200).filter(|&s| prob.run(&psi, Mode::Sampled(s)).unwrap().decision["exists_low"] == true).count();
    assert!(right as f64 / 200.0 >= 0.9);
    assert_eq!(prob.run(&psi, Mode::Exact).unwrap().decision["exists_low"], true);
}

#[test]
fn threshold_high_case() {
    let prob = ThresholdProblem::new(&diag(&[0.8, 0.9]), threshold_params(), &SolverOptions::default()).unwrap();
    let p0 = prob.p_zero(&uniform(2)).unwrap();
    let eps = FRAC_1_SQRT_2 / 4.0;
    assert!(p0 <= 0.5 * eps * eps, "{p0}");
    assert_eq!(prob.run(&uniform(2), Mode::Exact).unwrap().decision["exists_low"], false);
}

#[test]
fn threshold_shifts_negative_spectra() {
    let params = ThresholdParams { lambda_th: -0.2, ..threshold_params() };
    let prob = ThresholdProblem::new(&diag(&[-0.6, 0.5]), params, &SolverOptions::default()).unwrap();
    assert!(prob.shifted);
    assert!(prob.p_zero(&uniform(2)).unwrap() >= 0.5 * (1.0 - prob.epsilon));
    // A threshold below a nonnegative spectrum has no unshifted window.
    assert!(ThresholdProblem::new(&diag(&[0.1, 0.5]), params, &SolverOptions::default()).is_err());
    let params = ThresholdParams { lambda_th: 0.3, ..threshold_params() };
    let prob = ThresholdProblem::new(&diag(&[0.1, 0.5]), params, &SolverOptions::default()).unwrap();
    assert!(!prob.shifted);
}

fn phase_unitary(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, 2.0 * PI * phi))
}

fn one() -> ComplexVector {
    ComplexVector::from_element(1, c(1.0))
}

#[test]
fn phase_estimation_exact_bits() {
    let est = PhaseEstimator::new(0.1, 0.2, &SolverOptions::default()).unwrap();
    let r = est.run(&phase_unitary(0.625), &one(), 3, Mode::Exact, &[]).unwrap();
    assert_eq!(r.value, 0.625);
    assert_eq!(r.theta_bits, vec![0, 1, 0, 1]);
    assert_eq!(r.queries, 4 * est.degree() as u64);
}

#[test]
fn phase_estimation_rounds_up_to_one() {
    let est = PhaseEstimator::new(0.1, 0.2, &SolverOptions::default()).unwrap();
    let phi = 0b1110101 as f64 / 128.0;
    let r = est.run(&phase_unitary(phi), &one(), 2, Mode::Exact, &[]).unwrap();
    assert_eq!(r.theta_bits, vec![1, 0, 0]);
    assert_eq!(r.value, 1.0);
}

#[test]
fn first_singular_value_reads_last_bit() {
    let est = PhaseEstimator::new(0.1, 0.2, &SolverOptions::default()).unwrap();
    for (phi, sigma) in [(0.5, 1.0), (0.25, 0.0), (0.75, 0.0), (0.0, 1.0), (0.125, FRAC_1_SQRT_2)] {
        let r = est.run(&phase_unitary(phi), &one(), 2, Mode::Exact, &[]).unwrap();
        assert!((r.trace[0].sigma - sigma).abs() < 1e-12, "phi={phi}");
    }
}

#[test]
fn phase_estimation_failure_probability_is_small() {
    let eps = 0.1;
    let est = PhaseEstimator::new(eps, 0.2, &SolverOptions::default()).unwrap();
    for k in 0..16 {
        let phi = k as f64 / 16.0;
        let r = est.run(&phase_unitary(phi), &one(), 4, Mode::Sampled(k), &[]).unwrap();
        for it in &r.trace {
            assert!(it.p_fail <= 0.5 * eps * eps + 1e-12, "phi={phi} j={}: {}", it.j, it.p_fail);
        }
    }
}

#[test]
fn phase_estimation_on_larger_unitary() {
    let est = PhaseEstimator::new(0.1, 0.2, &SolverOptions::default()).unwrap();
    let v = ComplexMatrix::from_row_slice(2, 2, &[c(0.6), c(0.8), c(-0.8), c(0.6)]);
    let d = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
        Complex64::from_polar(1.0, 2.0 * PI * 0.375),
        Complex64::from_polar(1.0, 2.0 * PI * 0.8125),
    ]));
    let u = &v * d * v.adjoint();
    let state = v.column(1).into_owned();
    let r = est.run(&u, &state, 4, Mode::Exact, &[]).unwrap();
    assert_eq!(r.value, 0.8125);
}

#[test]
fn phase_estimation_rejects_bad_window() {
    assert!(PhaseEstimator::new(0.1, 0.3, &SolverOptions::default()).is_err());
    assert!((max_phase_window() - 0.2492).abs() < 1e-3);
    assert!((phase_error_budget(0.2) - 0.0507).abs() < 1e-3);
}

#[test]
fn continued_fractions() {
    assert_eq!(convergents(0.75, 15).last(), Some(&(3, 4)));
    assert_eq!(convergents(0.25, 15), vec![(0, 1), (1, 4)]);
    assert!(convergents(0.0, 15).iter().all(|&(p, _)| p == 0));
}

#[test]
fn order_finding_small_cases() {
    for (x, r) in [(7u64, 4u64), (4, 2)] {
        let finder = OrderFinder::new(15, 0.1, OrderFindingOptions::default()).unwrap();
        assert_eq!(finder.bits, 9);
        let ok = (0..40).filter(|&s| matches!(finder.run(x, 15, Mode::Sampled(s)), Ok(rec) if rec.decision["order"] == r)).count();
        assert!(ok >= 30, "x={x}: {ok}/40");
        let brute = (1..=15).find(|&k| (0..k).fold(1u64, |acc, _| acc * x % 15) == 1).unwrap();
        assert_eq!(brute, r);
    }
    assert!(modular_multiplication(5, 15).is_err());
}

#[test]
fn hamiltonian_simulation_matches_exponential() {
    let h = diag(&[0.3, 0.7]);
    let sim = hamiltonian_simulation(&h, 1.0, 1.0, 1e-3, false).unwrap();
    let exact = expm(&(&h * Complex64::new(0.0, -1.0)));
    let err = phase_aligned_error(&exact, &sim.encoding.encoded_operator());
    assert!(err <= 1e-3, "{err}");
    let kp = (solve_truncation(1.0, 1e-3 / 4.0).unwrap().r_value / 2.0).floor() as usize;
    assert_eq!(sim.k_prime, kp);
    assert_eq!(sim.queries, 4 * kp + 1);
}

#[test]
fn hamiltonian_simulation_at_time_zero() {
    let h = diag(&[0.3, -0.7]);
    let sim = hamiltonian_simulation(&h, 1.0, 0.0, 1e-2, false).unwrap();
    assert!(max_abs(&(sim.encoding.encoded_operator() - ComplexMatrix::identity(2, 2))) <= 1e-2);
    assert_eq!(sim.queries, 1);
}

#[test]
fn hamiltonian_simulation_with_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_hermitian(&mut rng, 2, 0.9);
    let sim = hamiltonian_simulation(&h, 1.0, 2.0, 1e-2, true).unwrap();
    let exact = expm(&(&h * Complex64::new(0.0, -2.0)));
    assert!(phase_aligned_error(&exact, &sim.encoding.encoded_operator()) <= 1e-2);
}

#[test]
fn hamiltonian_simulation_errors_add() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_hermitian(&mut rng, 3, 1.0);
    let sim = hamiltonian_simulation(&h, 1.0, 5.0, 1e-2, false).unwrap();
    let ht = &h * c(5.0);
    let cos = expm(&(&ht * Complex64::i())) * c(0.5) + expm(&(&ht * -Complex64::i())) * c(0.5);
    let sin = (expm(&(&ht * Complex64::i())) - expm(&(&ht * -Complex64::i()))) * Complex64::new(0.0, -0.5);
    let c_err = max_abs(&(qsvt::qsvt_engine::eigen_oracle(&h, &sim.cos_poly).unwrap() - &cos));
    let s_err = max_abs(&(qsvt::qsvt_engine::eigen_oracle(&h, &sim.sin_poly).unwrap() - &sin));
    let total = max_abs(&(sim.encoding.encoded_operator() - expm(&(&ht * -Complex64::i()))));
    assert!(total <= c_err + s_err + 1e-9, "{total} > {c_err} + {s_err}");
}

#[test]
fn hamiltonian_simulation_rejects_small_alpha() {
    assert!(matches!(hamiltonian_simulation(&diag(&[2.0]), 1.0, 1.0, 1e-2, false), Err(QsvtError::ScaleTooSmall { .. })));
    assert!(hamiltonian_simulation(&diag(&[0.2]), 1.0, 1.0, 0.5, false).is_err());
}

#[test]
fn matrix_inversion_diagonal() {
    let a = diag(&[0.5, 1.0]);
    let inv = matrix_inversion(&a, 2.0, 0.02).unwrap();
    let got = inv.encoding.encoded_operator();
    assert!(max_abs(&(&got - diag(&[2.0, 1.0]))) <= 0.02);
    // The raw block is the 1/(2 kappa)-scaled inverse.
    assert!(max_abs(&(extract_block(&inv.encoding) - diag(&[0.5, 0.25]))) <= 0.02 / 4.0);
    let x = inv.solve(&basis(2, 0)).unwrap();
    assert!((x[0].norm() - 1.0).abs() <= 0.02);
}

#[test]
fn matrix_inversion_identity_and_nonnormal() {
    let inv = matrix_inversion(&ComplexMatrix::identity(2, 2), 2.0, 0.05).unwrap();
    assert!(max_abs(&(inv.encoding.encoded_operator() - ComplexMatrix::identity(2, 2))) <= 0.05);

    let a = ComplexMatrix::from_row_slice(2, 2, &[c(0.7), c(0.3), c(0.0), c(0.6)]);
    let kappa = {
        let s = a.clone().singular_values();
        1.0 / s.min() + 1e-6
    };
    let inv = matrix_inversion(&a, kappa, 0.05).unwrap();
    let want = a.clone().try_inverse().unwrap();
    assert!(max_abs(&(inv.encoding.encoded_operator() - &want)) <= 0.05);
    let b = ComplexVector::from_vec(vec![c(0.6), c(0.8)]);
    let x = inv.solve(&b).unwrap();
    let y = &want * &b;
    let y = &y / c(y.norm());
    assert!((x - y).norm() <= 0.05);
}

#[test]
fn matrix_inversion_checks_condition() {
    assert!(matches!(matrix_inversion(&diag(&[0.2, 1.0]), 2.0, 0.05), Err(QsvtError::ConditionViolated(_))));
    assert!(matches!(matrix_inversion(&diag(&[1.2, 1.0]), 2.0, 0.05), Err(QsvtError::ConditionViolated(_))));
}
