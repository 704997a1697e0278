//! Exact statevector simulation of a hardware-efficient variational
//! ansatz (one block: Ry column, CNOT staircase with interleaved second
//! Ry column) and the 1D ferromagnetic Ising energy objective, with
//! optional finite-shot Gaussian noise.
//!
//! Qubit 0 is the most significant bit of the amplitude index: basis
//! state |q0 q1 ... q_{n-1}> lives at index q0*2^{n-1} + ... + q_{n-1}.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::{rng_from_seed, RunRng};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

/// Unit-norm complex state over n qubits.
#[derive(Debug, Clone)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    n_qubits: usize,
}

impl QuantumState {
    /// |0...0> over n qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid_argument("need at least one qubit"));
        }
        let mut amplitudes = vec![Complex64::ZERO; 1 << n_qubits];
        amplitudes[0] = Complex64::ONE;
        Ok(QuantumState {
            amplitudes,
            n_qubits,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid_argument(
                "amplitude count must be a power of two >= 2",
            ));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid_argument(format!(
                "state norm^2 = {norm}, not 1"
            )));
        }
        Ok(QuantumState {
            amplitudes,
            n_qubits: len.trailing_zeros() as usize,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::invalid_argument(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Single-qubit rotation Ry(theta) = [[cos t/2, -sin t/2],
    /// [sin t/2, cos t/2]]; norm-preserving, theta = 0 is the identity.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (c, s) = half_angle(theta);
        let mask = 1usize << (self.n_qubits - 1 - qubit);
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + mask {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + mask];
                self.amplitudes[i] = c * a0 - s * a1;
                self.amplitudes[i + mask] = s * a0 + c * a1;
            }
            base += 2 * mask;
        }
        Ok(())
    }

    /// Flips the target bit wherever the control bit is set; an exact
    /// amplitude permutation (its own inverse).
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid_argument("control and target must differ"));
        }
        let cmask = 1usize << (self.n_qubits - 1 - control);
        let tmask = 1usize << (self.n_qubits - 1 - target);
        for z in 0..self.amplitudes.len() {
            if z & cmask != 0 && z & tmask == 0 {
                self.amplitudes.swap(z, z | tmask);
            }
        }
        Ok(())
    }
}

fn half_angle(theta: f64) -> (f64, f64) {
    ((0.5 * theta).cos(), (0.5 * theta).sin())
}

/// Builds the one-block ansatz state from |0...0>: Ry(theta[q]) on every
/// qubit, then the CNOT staircase with the second Ry column interleaved
/// as drawn — after CNOT(k -> k+1), qubit k receives Ry(theta[n + k]);
/// the last qubit receives its second rotation after the final CNOT.
pub fn prepare_state(theta: &[f64], n_qubits: usize) -> Result<QuantumState> {
    if theta.len() != 2 * n_qubits {
        return Err(Error::invalid_argument(format!(
            "expected {} parameters for {} qubits, got {}",
            2 * n_qubits,
            n_qubits,
            theta.len()
        )));
    }
    let mut state = QuantumState::zero(n_qubits)?;
    for q in 0..n_qubits {
        state.apply_ry(q, theta[q])?;
    }
    for k in 0..n_qubits.saturating_sub(1) {
        state.apply_cnot(k, k + 1)?;
        state.apply_ry(k, theta[n_qubits + k])?;
    }
    state.apply_ry(n_qubits - 1, theta[2 * n_qubits - 1])?;
    Ok(state)
}

/// Diagonal energy of one computational basis state under
/// H = -sum_i Z_i Z_{i+1}: adjacent equal bits contribute -1, unequal +1.
fn basis_energy(z: usize, n_qubits: usize) -> f64 {
    let mut e = 0.0;
    for q in 0..n_qubits.saturating_sub(1) {
        let b_hi = (z >> (n_qubits - 1 - q)) & 1;
        let b_lo = (z >> (n_qubits - 2 - q)) & 1;
        e += if b_hi == b_lo { -1.0 } else { 1.0 };
    }
    e
}

/// <psi| H |psi> for the nearest-neighbour Ising chain without field:
/// sum over basis states of |a_z|^2 * E(z). Lies in [-(n-1), n-1].
pub fn ising_energy(state: &QuantumState) -> f64 {
    state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(z, a)| a.norm_sqr() * basis_energy(z, state.n_qubits))
        .sum()
}

/// Ising-chain energy of the one-block ansatz as an optimization
/// objective over 2n angles in [-pi, pi].
///
/// In exact mode the value is the analytic expectation; in shot mode a
/// single Gaussian draw N(0, 1/sqrt(shots)) is added per evaluation, so
/// values may undercut the physical ground energy.
#[derive(Debug, Clone)]
pub struct IsingVqaObjective {
    n_qubits: usize,
    shots: Option<u32>,
    noise_rng: RunRng,
    noise_sigma: f64,
    bounds: Vec<(f64, f64)>,
    energy_table: Vec<f64>,
    // the whole circuit is real, so evaluation runs on a reusable real
    // amplitude buffer instead of allocating complex states
    scratch: Vec<f64>,
}

impl IsingVqaObjective {
    pub fn new(n_qubits: usize, shots: Option<u32>, noise_seed: u64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid_argument("need at least two qubits"));
        }
        if shots == Some(0) {
            return Err(Error::invalid_argument("shots must be positive"));
        }
        let dim = 1usize << n_qubits;
        Ok(IsingVqaObjective {
            n_qubits,
            shots,
            noise_rng: rng_from_seed(noise_seed),
            noise_sigma: shots.map_or(0.0, |s| 1.0 / (s as f64).sqrt()),
            bounds: vec![(-PI, PI); 2 * n_qubits],
            energy_table: (0..dim).map(|z| basis_energy(z, n_qubits)).collect(),
            scratch: vec![0.0; dim],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> Option<u32> {
        self.shots
    }

    /// Ground-state energy of the chain: -(n-1).
    pub fn ground_energy(&self) -> f64 {
        -((self.n_qubits - 1) as f64)
    }

    /// Noise-free circuit energy.
    pub fn exact_energy(&mut self, theta: &[f64]) -> Result<f64> {
        let n = self.n_qubits;
        if theta.len() != 2 * n {
            return Err(Error::invalid_argument(format!(
                "expected {} parameters, got {}",
                2 * n,
                theta.len()
            )));
        }
        let amps = &mut self.scratch;
        // first Ry column on |0...0> is a product state; build it by
        // doubling instead of full gate sweeps
        amps[0] = 1.0;
        let mut len = 1usize;
        for &t in &theta[..n] {
            let (c, s) = half_angle(t);
            for i in (0..len).rev() {
                let a = amps[i];
                amps[2 * i] = a * c;
                amps[2 * i + 1] = a * s;
            }
            len *= 2;
        }
        for k in 0..n - 1 {
            cnot_real(amps, n, k, k + 1);
            ry_real(amps, n, k, theta[n + k]);
        }
        ry_real(amps, n, n - 1, theta[2 * n - 1]);
        Ok(amps
            .iter()
            .zip(&self.energy_table)
            .map(|(&a, &e)| a * a * e)
            .sum())
    }
}

fn ry_real(amps: &mut [f64], n_qubits: usize, qubit: usize, theta: f64) {
    let (c, s) = half_angle(theta);
    let mask = 1usize << (n_qubits - 1 - qubit);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + mask {
            let a0 = amps[i];
            let a1 = amps[i + mask];
            amps[i] = c * a0 - s * a1;
            amps[i + mask] = s * a0 + c * a1;
        }
        base += 2 * mask;
    }
}

fn cnot_real(amps: &mut [f64], n_qubits: usize, control: usize, target: usize) {
    let cmask = 1usize << (n_qubits - 1 - control);
    let tmask = 1usize << (n_qubits - 1 - target);
    for z in 0..amps.len() {
        if z & cmask != 0 && z & tmask == 0 {
            amps.swap(z, z | tmask);
        }
    }
}

impl Objective for IsingVqaObjective {
    fn dimension(&self) -> usize {
        2 * self.n_qubits
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        let exact = self
            .exact_energy(x)
            .expect("dimension checked by caller");
        match self.shots {
            None => exact,
            Some(_) => {
                let noise = Normal::new(0.0, self.noise_sigma)
                    .expect("finite sigma")
                    .sample(&mut self.noise_rng);
                exact + noise
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn amp(state: &QuantumState, z: usize) -> Complex64 {
        state.amplitudes()[z]
    }

    #[test]
    fn ry_zero_is_identity() {
        let mut state = QuantumState::zero(3).unwrap();
        state.apply_ry(1, 0.0).unwrap();
        assert_eq!(amp(&state, 0), Complex64::ONE);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ry_pi_flips_basis_state() {
        let mut state = QuantumState::zero(1).unwrap();
        state.apply_ry(0, PI).unwrap();
        assert!((amp(&state, 1) - Complex64::ONE).norm() < 1e-12);
        assert!(amp(&state, 0).norm() < 1e-12);
    }

    #[test]
    fn ry_half_pi_makes_equal_superposition() {
        let mut state = QuantumState::zero(1).unwrap();
        state.apply_ry(0, PI / 2.0).unwrap();
        assert!((amp(&state, 0).re - SQRT_HALF).abs() < 1e-12);
        assert!((amp(&state, 1).re - SQRT_HALF).abs() < 1e-12);
    }

    #[test]
    fn ry_bad_qubit_rejected() {
        let mut state = QuantumState::zero(2).unwrap();
        assert!(state.apply_ry(2, 0.5).is_err());
    }

    #[test]
    fn cnot_truth_table() {
        // |00> -> |00>
        let mut state = QuantumState::zero(2).unwrap();
        state.apply_cnot(0, 1).unwrap();
        assert_eq!(amp(&state, 0b00), Complex64::ONE);
        // |10> -> |11> (control qubit 0 set)
        let mut state = QuantumState::zero(2).unwrap();
        state.apply_ry(0, PI).unwrap();
        state.apply_cnot(0, 1).unwrap();
        assert!((amp(&state, 0b11) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn cnot_is_involution() {
        let mut rng = rng_from_seed(31);
        let theta: Vec<f64> = (0..6).map(|_| rng.random_range(-PI..PI)).collect();
        let state = prepare_state(&theta, 3).unwrap();
        let mut twice = state.clone();
        twice.apply_cnot(1, 2).unwrap();
        twice.apply_cnot(1, 2).unwrap();
        for z in 0..8 {
            assert!((amp(&twice, z) - amp(&state, z)).norm() < 1e-15);
        }
    }

    #[test]
    fn cnot_same_qubit_rejected() {
        let mut state = QuantumState::zero(2).unwrap();
        assert!(state.apply_cnot(1, 1).is_err());
    }

    #[test]
    fn prepare_zero_angles_gives_zero_state() {
        let state = prepare_state(&[0.0; 8], 4).unwrap();
        assert_eq!(amp(&state, 0), Complex64::ONE);
        for z in 1..16 {
            assert_eq!(amp(&state, z), Complex64::ZERO);
        }
    }

    #[test]
    fn prepare_flip_propagates_through_staircase() {
        let state = prepare_state(&[PI, 0.0, 0.0, 0.0], 2).unwrap();
        assert!((amp(&state, 0b11) - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn prepare_superposition_on_second_qubit() {
        let state = prepare_state(&[0.0, PI / 2.0, 0.0, 0.0], 2).unwrap();
        assert!((amp(&state, 0b00).re - SQRT_HALF).abs() < 1e-12);
        assert!((amp(&state, 0b01).re - SQRT_HALF).abs() < 1e-12);
        assert!(amp(&state, 0b10).norm() < 1e-12);
        assert!(amp(&state, 0b11).norm() < 1e-12);
    }

    #[test]
    fn prepare_wrong_parameter_count_rejected() {
        assert!(prepare_state(&[0.0; 7], 4).is_err());
    }

    #[test]
    fn norm_preserved_through_full_circuit() {
        let mut rng = rng_from_seed(32);
        for n in 2..=6 {
            let theta: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-PI..PI)).collect();
            let state = prepare_state(&theta, n).unwrap();
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ising_energy_reference_states() {
        let zero10 = QuantumState::zero(10).unwrap();
        assert_eq!(ising_energy(&zero10), -9.0);
        // |1...1>: spin-flip partner of the all-zero state
        let mut ones = vec![Complex64::ZERO; 1 << 10];
        ones[(1 << 10) - 1] = Complex64::ONE;
        let ones = QuantumState::from_amplitudes(ones).unwrap();
        assert_eq!(ising_energy(&ones), -9.0);
        // (|00> + |01>)/sqrt(2): terms -1 and +1 average to zero
        let mix = QuantumState::from_amplitudes(vec![
            Complex64::new(SQRT_HALF, 0.0),
            Complex64::new(SQRT_HALF, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
        ])
        .unwrap();
        assert!(ising_energy(&mix).abs() < 1e-15);
    }

    #[test]
    fn ising_energy_spin_flip_invariant() {
        let mut rng = rng_from_seed(33);
        for n in 2..=5 {
            let theta: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-PI..PI)).collect();
            let state = prepare_state(&theta, n).unwrap();
            let dim = 1usize << n;
            let flipped: Vec<Complex64> =
                (0..dim).map(|z| state.amplitudes()[!z & (dim - 1)]).collect();
            let flipped = QuantumState::from_amplitudes(flipped).unwrap();
            assert!((ising_energy(&state) - ising_energy(&flipped)).abs() < 1e-12);
        }
    }

    #[test]
    fn ising_energy_within_physical_range() {
        let mut rng = rng_from_seed(34);
        for _ in 0..50 {
            let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-PI..PI)).collect();
            let state = prepare_state(&theta, 4).unwrap();
            let e = ising_energy(&state);
            assert!((-3.0..=3.0).contains(&e), "energy {e}");
        }
    }

    #[test]
    fn objective_ground_state_at_origin() {
        let mut obj = IsingVqaObjective::new(10, None, 0).unwrap();
        assert_eq!(obj.evaluate(&[0.0; 20]), -9.0);
        assert_eq!(obj.ground_energy(), -9.0);
        assert_eq!(Objective::dimension(&obj), 20);
        assert!(obj.bounds().iter().all(|&(lo, hi)| lo == -PI && hi == PI));
    }

    #[test]
    fn objective_matches_gate_level_path() {
        // the real-buffer kernel must agree with the complex gate API
        let mut rng = rng_from_seed(35);
        for n in 2..=6 {
            let mut obj = IsingVqaObjective::new(n, None, 0).unwrap();
            for _ in 0..40 {
                let theta: Vec<f64> =
                    (0..2 * n).map(|_| rng.random_range(-PI..PI)).collect();
                let fast = obj.exact_energy(&theta).unwrap();
                let slow = ising_energy(&prepare_state(&theta, n).unwrap());
                assert!((fast - slow).abs() < 1e-12, "n={n}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn objective_two_pi_periodic() {
        let mut rng = rng_from_seed(36);
        let mut obj = IsingVqaObjective::new(4, None, 0).unwrap();
        let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-PI..PI)).collect();
        let base = obj.exact_energy(&theta).unwrap();
        for j in 0..8 {
            let mut shifted = theta.clone();
            shifted[j] += 2.0 * PI;
            let v = obj.exact_energy(&shifted).unwrap();
            assert!((v - base).abs() < 1e-10, "coordinate {j}");
        }
    }

    #[test]
    fn noisy_objective_sigma_matches_shot_law() {
        let mut obj = IsingVqaObjective::new(4, Some(1024), 99).unwrap();
        let theta = vec![0.3; 8];
        let exact = obj.exact_energy(&theta).unwrap();
        let n = 100_000;
        let values: Vec<f64> = (0..n).map(|_| obj.evaluate(&theta)).collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma = var.sqrt();
        let expected = 1.0 / 1024f64.sqrt();
        assert!(
            (sigma - expected).abs() < 0.02 * expected,
            "sigma {sigma} vs {expected}"
        );
        assert!((mean - exact).abs() < 4.0 * expected / (n as f64).sqrt());
    }

    #[test]
    fn noisy_objective_replays_bitwise() {
        let theta = vec![0.1; 8];
        let run = |seed: u64| -> Vec<f64> {
            let mut obj = IsingVqaObjective::new(4, Some(1024), seed).unwrap();
            (0..10).map(|_| obj.evaluate(&theta)).collect()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn objective_validation() {
        assert!(IsingVqaObjective::new(1, None, 0).is_err());
        assert!(IsingVqaObjective::new(4, Some(0), 0).is_err());
        let mut obj = IsingVqaObjective::new(4, None, 0).unwrap();
        assert!(obj.exact_energy(&[0.0; 7]).is_err());
    }

    // -- independent dense-unitary oracle ------------------------------

    type Matrix = Vec<Vec<Complex64>>;

    fn mat_identity(dim: usize) -> Matrix {
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { Complex64::ONE } else { Complex64::ZERO })
                    .collect()
            })
            .collect()
    }

    fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
        let dim = a.len();
        let mut out = vec![vec![Complex64::ZERO; dim]; dim];
        for i in 0..dim {
            for k in 0..dim {
                let aik = a[i][k];
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..dim {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
        out
    }

    fn kron(a: &Matrix, b: &Matrix) -> Matrix {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![Complex64::ZERO; ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    fn ry_gate_matrix(n: usize, qubit: usize, theta: f64) -> Matrix {
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let g = vec![
            vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ];
        let mut m = mat_identity(1);
        for q in 0..n {
            let factor = if q == qubit { g.clone() } else { mat_identity(2) };
            m = kron(&m, &factor);
        }
        m
    }

    fn cnot_gate_matrix(n: usize, control: usize, target: usize) -> Matrix {
        let dim = 1usize << n;
        let cmask = 1usize << (n - 1 - control);
        let tmask = 1usize << (n - 1 - target);
        let mut m = vec![vec![Complex64::ZERO; dim]; dim];
        for z in 0..dim {
            let out = if z & cmask != 0 { z ^ tmask } else { z };
            m[out][z] = Complex64::ONE;
        }
        m
    }

    fn oracle_energy(theta: &[f64], n: usize) -> f64 {
        // assemble the full circuit unitary in application order
        let mut circuit = mat_identity(1 << n);
        let apply = |gate: Matrix, circuit: &mut Matrix| {
            *circuit = mat_mul(&gate, circuit);
        };
        for q in 0..n {
            apply(ry_gate_matrix(n, q, theta[q]), &mut circuit);
        }
        for k in 0..n - 1 {
            apply(cnot_gate_matrix(n, k, k + 1), &mut circuit);
            apply(ry_gate_matrix(n, k, theta[n + k]), &mut circuit);
        }
        apply(ry_gate_matrix(n, n - 1, theta[2 * n - 1]), &mut circuit);
        // state = first column (action on |0...0>)
        let dim = 1usize << n;
        (0..dim)
            .map(|z| circuit[z][0].norm_sqr() * basis_energy(z, n))
            .sum()
    }

    #[test]
    fn statevector_agrees_with_dense_oracle() {
        let mut rng = rng_from_seed(37);
        for n in 2..=4 {
            let mut obj = IsingVqaObjective::new(n, None, 0).unwrap();
            for _ in 0..20 {
                let theta: Vec<f64> =
                    (0..2 * n).map(|_| rng.random_range(-PI..PI)).collect();
                let fast = obj.exact_energy(&theta).unwrap();
                let dense = oracle_energy(&theta, n);
                assert!(
                    (fast - dense).abs() < 1e-12,
                    "n={n}: {fast} vs oracle {dense}"
                );
            }
        }
    }
}
