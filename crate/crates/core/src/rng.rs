//! Seeded random stream shared by instance generators and suites.
//!
//! The generator is SplitMix64: the state advances by `0x9E3779B97F4A7C15`
//! and each output is the state passed through the mixer
//! `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31`.
//! Uniform doubles take the top 53 bits. Each standard normal consumes two
//! uniforms `u1, u2` through Box–Muller, `sqrt(-2 ln(1 - u1)) cos(2π u2)`.
//! Complex normals draw the real part first, then the imaginary part, each
//! scaled by `1/√2`. Matrices are filled in row-major order.

use std::f64::consts::TAU;

use crate::linalg::{polar_decompose, CMatrix, TolerancePolicy, C64};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Independent stream for trial `index` of a run seeded with `seed`.
    pub fn for_trial(seed: u64, index: u64) -> Self {
        let mut mixer = Self::new(seed ^ 0xD1B5_4A32_D192_ED03u64.wrapping_mul(index.wrapping_add(1)));
        Self::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data: Vec<C64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        CMatrix::from_row_major(rows, cols, &data).expect("length matches shape")
    }

    pub fn real_gaussian(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        CMatrix::from_real(rows, cols, &data)
    }

    /// Haar-distributed unitary from the polar factor of a Ginibre matrix.
    pub fn haar_unitary(&mut self, n: usize) -> CMatrix {
        polar_decompose(&self.ginibre(n, n), &TolerancePolicy::default()).r
    }

    /// Random subset of `0..n` of the given size.
    pub fn subset(&mut self, n: usize, size: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..size.min(n) {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(size.min(n));
        idx.sort_unstable();
        idx
    }
}
