use num_complex::Complex64;

use super::tables::AveragingTables;
use crate::model::ResonantQuadraticModel;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial coefficients `V_0 ..= V_p`, each a complex `d`-vector, stored
/// block-contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedState {
    dim: usize,
    data: Vec<Complex64>,
}

impl StackedState {
    pub fn zeros(dim: usize, blocks: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * blocks],
        }
    }

    /// `V_0 = u0`, all higher blocks zero.
    pub fn initial(u0: &[Complex64], blocks: usize) -> Self {
        let mut s = Self::zeros(u0.len(), blocks);
        s.data[..u0.len()].copy_from_slice(u0);
        s
    }

    pub fn from_flat(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) || data.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn block(&self, k: usize) -> &[Complex64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [Complex64] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }
}

/// Right-hand side of the averaged system, bound to one model and table set.
///
/// For block row `j` the projected forcing is
/// `b_j = Σ_m exp(i c_m t) D_m Σ_{k,l} F_m(V_k, V_l) R^m_{j+k+l}`
/// and the derivative is `M⁻¹ b`, applied componentwise. The mass inverse
/// is pre-multiplied into the moments per frequency, see
/// [`AveragingTables::projected_moments`].
pub struct AveragedRhs<'a> {
    model: &'a ResonantQuadraticModel,
    tables: &'a AveragingTables,
    term_rows: Vec<usize>,
    blocks: usize,
    dim: usize,
    pair_sums: Vec<Complex64>,
}

impl<'a> AveragedRhs<'a> {
    pub fn new(model: &'a ResonantQuadraticModel, tables: &'a AveragingTables) -> Result<Self> {
        let term_rows = model
            .terms()
            .iter()
            .map(|t| {
                tables
                    .frequency_index(t.frequency())
                    .ok_or(Error::MissingFrequency(t.frequency()))
            })
            .collect::<Result<Vec<_>>>()?;
        let blocks = tables.degree() + 1;
        let dim = model.dim();
        Ok(Self {
            model,
            tables,
            term_rows,
            blocks,
            dim,
            pair_sums: vec![ZERO; (2 * blocks - 1) * dim],
        })
    }

    /// Flattened state length `d (p + 1)`.
    pub fn len(&self) -> usize {
        self.blocks * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval(&mut self, t: f64, state: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(state.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let (d, n) = (self.dim, self.blocks);
        out.iter_mut().for_each(|x| *x = ZERO);
        let width = 2 * n - 1;

        for (term, &row) in self.model.terms().iter().zip(&self.term_rows) {
            if self.tables.damping(row) == 0.0 {
                continue;
            }
            // Collect F_m(V_k, V_l) by total degree k + l.
            self.pair_sums.iter_mut().for_each(|x| *x = ZERO);
            for k in 0..n {
                let vk = &state[k * d..(k + 1) * d];
                for l in 0..n {
                    let vl = &state[l * d..(l + 1) * d];
                    let a = k + l;
                    term.accumulate(vk, vl, &mut self.pair_sums[a * d..(a + 1) * d]);
                }
            }
            let phase = Complex64::from_polar(1.0, term.frequency() * t);
            let proj = self.tables.projected_moments(row);
            for k in 0..n {
                let target = &mut out[k * d..(k + 1) * d];
                for a in 0..width {
                    let w = proj[k * width + a];
                    if w == ZERO {
                        continue;
                    }
                    let coef = phase * w;
                    for (o, g) in target.iter_mut().zip(&self.pair_sums[a * d..(a + 1) * d]) {
                        *o += coef * g;
                    }
                }
            }
        }
    }
}

/// Time derivative of the stacked coefficients at `t`.
pub fn assemble_averaged_rhs(
    t: f64,
    state: &StackedState,
    model: &ResonantQuadraticModel,
    tables: &AveragingTables,
) -> Result<StackedState> {
    if state.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: state.dim(),
        });
    }
    if state.blocks() != tables.degree() + 1 {
        return Err(Error::DimensionMismatch {
            expected: tables.degree() + 1,
            actual: state.blocks(),
        });
    }
    let mut rhs = AveragedRhs::new(model, tables)?;
    let mut out = StackedState::zeros(state.dim(), state.blocks());
    rhs.eval(t, state.as_slice(), &mut out.data);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::{build_tables, AveragingConfig};
    use crate::model::{swing_spring_model, SpringParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn stacked_state_layout() {
        let s = StackedState::initial(&[c(1.0, 0.0), c(2.0, 0.0)], 3);
        assert_eq!(s.blocks(), 3);
        assert_eq!(s.block(0), &[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(s.block(2).iter().all(|z| *z == ZERO));
        assert!(StackedState::from_flat(2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn zero_state_gives_zero_derivative() {
        let model = swing_spring_model(&SpringParams::default()).unwrap();
        let tables = build_tables(AveragingConfig::new(3, 0.2).unwrap(), &model.frequencies()).unwrap();
        let out = assemble_averaged_rhs(1.1, &StackedState::zeros(3, 4), &model, &tables).unwrap();
        assert!(out.as_slice().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn shape_errors() {
        let model = swing_spring_model(&SpringParams::default()).unwrap();
        let tables = build_tables(AveragingConfig::new(2, 0.2).unwrap(), &model.frequencies()).unwrap();
        assert!(matches!(
            assemble_averaged_rhs(0.0, &StackedState::zeros(3, 4), &model, &tables),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            assemble_averaged_rhs(0.0, &StackedState::zeros(2, 3), &model, &tables),
            Err(Error::DimensionMismatch { .. })
        ));
        let sparse = build_tables(AveragingConfig::new(2, 0.2).unwrap(), &[0.0]).unwrap();
        assert!(matches!(
            assemble_averaged_rhs(0.0, &StackedState::zeros(3, 3), &model, &sparse),
            Err(Error::MissingFrequency(_))
        ));
    }

    #[test]
    fn degree_zero_is_damped_single_term_sum() {
        let model = swing_spring_model(&SpringParams::default()).unwrap();
        let window = 0.3;
        let tables = build_tables(AveragingConfig::new(0, window).unwrap(), &model.frequencies()).unwrap();
        let v = [c(0.01, 0.002), c(-0.003, 0.004), c(0.012, -0.001)];
        let t = 2.7;
        let out = assemble_averaged_rhs(t, &StackedState::initial(&v, 1), &model, &tables).unwrap();
        let mut expected = [ZERO; 3];
        for term in model.terms() {
            let f = term.apply(&v, &v);
            let w =
                Complex64::from_polar(1.0, term.frequency() * t) * (-0.5 * (term.frequency() * window).powi(2)).exp();
            for j in 0..3 {
                expected[j] += f[j] * w;
            }
        }
        for (got, want) in out.block(0).iter().zip(&expected) {
            assert!((got - want).norm() <= 1e-15 * want.norm().max(1e-300));
        }
    }
}
