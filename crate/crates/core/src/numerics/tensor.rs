use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Third-order complex tensor held as `n3` frontal panels of shape `n1 × n2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor3 {
    n1: usize,
    n2: usize,
    panels: Vec<ComplexMatrix>,
}

impl ComplexTensor3 {
    pub fn from_panels(panels: Vec<ComplexMatrix>) -> Result<Self> {
        let (n1, n2) = panels
            .first()
            .ok_or_else(|| Error::Shape("tensor needs at least one panel".into()))?
            .shape();
        if let Some(k) = panels.iter().position(|p| p.shape() != (n1, n2)) {
            return Err(Error::Shape(format!(
                "panel {k} is {}x{}, expected {n1}x{n2}",
                panels[k].rows(),
                panels[k].cols()
            )));
        }
        Ok(Self { n1, n2, panels })
    }

    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        assert!(n3 >= 1);
        Self {
            n1,
            n2,
            panels: vec![ComplexMatrix::zeros(n1, n2); n3],
        }
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn n3(&self) -> usize {
        self.panels.len()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.panels.len())
    }

    pub fn panel(&self, l: usize) -> &ComplexMatrix {
        &self.panels[l]
    }

    pub fn panel_mut(&mut self, l: usize) -> &mut ComplexMatrix {
        &mut self.panels[l]
    }

    pub fn panels(&self) -> &[ComplexMatrix] {
        &self.panels
    }

    pub fn into_panels(self) -> Vec<ComplexMatrix> {
        self.panels
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.panels
            .iter()
            .map(|p| p.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.panels.iter().map(ComplexMatrix::l1_norm).sum()
    }

    pub fn distance(&self, other: &ComplexTensor3) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.panels
            .iter()
            .zip(&other.panels)
            .map(|(a, b)| a.distance(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Element-wise map over every panel.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> ComplexTensor3 {
        Self {
            n1: self.n1,
            n2: self.n2,
            panels: self.panels.iter().map(|p| p.map(&f)).collect(),
        }
    }

    /// Element-wise combination of two tensors of equal shape.
    pub fn zip_map(&self, other: &ComplexTensor3, f: impl Fn(Complex64, Complex64) -> Complex64) -> ComplexTensor3 {
        assert_eq!(self.shape(), other.shape());
        let panels = self
            .panels
            .iter()
            .zip(&other.panels)
            .map(|(a, b)| {
                let data = a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| f(x, y)).collect();
                ComplexMatrix::from_vec(self.n1, self.n2, data).expect("shape preserved")
            })
            .collect();
        Self {
            n1: self.n1,
            n2: self.n2,
            panels,
        }
    }
}

/// Unitary DFT along the panel index, planned once for a fixed `n3`.
///
/// Forward: `Â⁽ᵏ⁾ = n3^{-1/2} Σ_ℓ ω^{ℓk} A⁽ℓ⁾` with `ω = e^{i2π/n3}`.
/// Inverse uses `ω̄`. Both directions carry the same `1/√n3` factor.
pub struct AxisDft {
    n3: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AxisDft {
    pub fn new(n3: usize) -> Self {
        assert!(n3 >= 1);
        let mut planner = FftPlanner::new();
        // rustfft's "Inverse" direction is the positive-exponent sum.
        Self {
            n3,
            forward: planner.plan_fft(n3, FftDirection::Inverse),
            inverse: planner.plan_fft(n3, FftDirection::Forward),
        }
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn apply(&self, t: &ComplexTensor3, inverse: bool) -> ComplexTensor3 {
        assert_eq!(t.n3(), self.n3, "planned for a different panel count");
        if self.n3 == 1 {
            return t.clone();
        }
        let (n1, n2, n3) = t.shape();
        let cells = n1 * n2;
        // tube (i, j) is contiguous: buf[cell * n3 + l]
        let mut buf = vec![Complex64::new(0.0, 0.0); cells * n3];
        for (l, p) in t.panels().iter().enumerate() {
            for (cell, &z) in p.as_slice().iter().enumerate() {
                buf[cell * n3 + l] = z;
            }
        }
        let fft = if inverse { &self.inverse } else { &self.forward };
        let chunk = n3 * (cells.div_ceil(rayon::current_num_threads().max(1))).max(1);
        buf.par_chunks_mut(chunk).for_each(|block| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(block, &mut scratch);
        });
        let scale = 1.0 / (n3 as f64).sqrt();
        let panels = (0..n3)
            .map(|l| {
                let data = (0..cells).map(|cell| buf[cell * n3 + l] * scale).collect();
                ComplexMatrix::from_vec(n1, n2, data).expect("shape preserved")
            })
            .collect();
        ComplexTensor3 { n1, n2, panels }
    }
}

/// Unitary DFT along axis 3 (see [`AxisDft`]).
pub fn dft_axis3(t: &ComplexTensor3, inverse: bool) -> ComplexTensor3 {
    AxisDft::new(t.n3()).apply(t, inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::test_util::random_tensor;
    use approx::assert_relative_eq;

    #[test]
    fn two_identical_panels_collapse_to_first_bin() {
        let a = crate::numerics::test_util::random_matrix(3, 2, 1);
        let t = ComplexTensor3::from_panels(vec![a.clone(), a.clone()]).unwrap();
        let f = dft_axis3(&t, false);
        let expected = a.scale(2f64.sqrt());
        assert!(f.panel(0).distance(&expected) < 1e-14);
        assert!(f.panel(1).frobenius_norm() < 1e-14);
    }

    #[test]
    fn single_panel_is_identity() {
        let t = random_tensor(4, 3, 1, 5);
        assert_eq!(dft_axis3(&t, false), t);
        assert_eq!(dft_axis3(&t, true), t);
    }

    #[test]
    fn matches_direct_sum_with_positive_exponent() {
        let t = random_tensor(2, 3, 5, 8);
        let f = dft_axis3(&t, false);
        let n3 = 5;
        for k in 0..n3 {
            for i in 0..2 {
                for j in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for l in 0..n3 {
                        let phase = 2.0 * std::f64::consts::PI * (l * k) as f64 / n3 as f64;
                        acc += Complex64::from_polar(1.0, phase) * t.panel(l)[(i, j)];
                    }
                    acc /= (n3 as f64).sqrt();
                    assert!((acc - f.panel(k)[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        for &(n1, n2, n3) in &[(4, 5, 3), (6, 2, 8), (3, 3, 17)] {
            let t = random_tensor(n1, n2, n3, (n1 * n2 * n3) as u64);
            let f = dft_axis3(&t, false);
            assert_relative_eq!(f.frobenius_norm(), t.frobenius_norm(), max_relative = 1e-12);
            let back = dft_axis3(&f, true);
            assert!(back.distance(&t) / t.frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let t = random_tensor(5, 5, 6, 2);
        assert_eq!(dft_axis3(&t, false), dft_axis3(&t, false));
    }
}
