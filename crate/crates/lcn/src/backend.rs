//! Dense LU backend on `faer`.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use lcn_core::solver::DenseBackend;
use lcn_core::{Error, Result};

use crate::config::BackendKind;

/// Partial-pivot LU from `faer`; rows are written straight into its storage.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaerLu;

impl DenseBackend for FaerLu {
    fn solve(&self, n: usize, fill_row: &mut dyn FnMut(usize, &mut [f64]), rhs: &[f64]) -> Result<Vec<f64>> {
        let mut a = Mat::<f64>::zeros(n, n);
        let mut row = vec![0.0; n];
        for i in 0..n {
            fill_row(i, &mut row);
            for (j, v) in row.iter().enumerate() {
                a[(i, j)] = *v;
            }
        }
        let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        let lu = PartialPivLu::new(a.as_ref());
        let x = lu.solve(&b);
        let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot: 0 });
        }
        Ok(out)
    }
}

pub fn backend(kind: BackendKind) -> Box<dyn DenseBackend> {
    match kind {
        BackendKind::Faer => Box::new(FaerLu),
        BackendKind::Builtin => Box::new(lcn_core::BuiltinLu),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_with_builtin() {
        let n = 7;
        let m = |i: usize, j: usize| if i == j { 3.0 } else { 1.0 / (1 + i + 2 * j) as f64 };
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut fill = |i: usize, row: &mut [f64]| {
            for (j, r) in row.iter_mut().enumerate() {
                *r = m(i, j);
            }
        };
        let a = FaerLu.solve(n, &mut fill, &rhs).unwrap();
        let b = lcn_core::BuiltinLu.solve(n, &mut fill, &rhs).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
