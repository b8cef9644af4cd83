//! Tabulated coefficients with multilinear interpolation on a box in the
//! real coordinates `(Re w₁, Im w₁, …, Re w_m, Im w_m)`.

use crate::C64;

use super::FormError;

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    lower: Vec<f64>,
    upper: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<C64>,
}

impl GridField {
    /// `values` are in row-major order with the last real axis fastest.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, shape: Vec<usize>, values: Vec<C64>) -> Result<Self, FormError> {
        let ok = !shape.is_empty()
            && shape.len() % 2 == 0
            && lower.len() == shape.len()
            && upper.len() == shape.len()
            && shape.iter().all(|&s| s >= 2)
            && lower.iter().zip(&upper).all(|(a, b)| a < b)
            && values.len() == shape.iter().product::<usize>();
        if !ok {
            return Err(FormError::Invalid("inconsistent grid definition".into()));
        }
        Ok(Self {
            lower,
            upper,
            shape,
            values,
        })
    }

    /// Samples `f` on a uniform grid.
    pub fn tabulate<F: Fn(&[C64]) -> C64>(
        f: F,
        lower: Vec<f64>,
        upper: Vec<f64>,
        shape: Vec<usize>,
    ) -> Result<Self, FormError> {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            let reals: Vec<f64> = (0..shape.len())
                .map(|a| lower[a] + (upper[a] - lower[a]) * idx[a] as f64 / (shape[a] - 1) as f64)
                .collect();
            let w: Vec<C64> = reals.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
            values.push(f(&w));
            for a in (0..shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Self::new(lower, upper, shape, values)
    }

    /// Complex dimension of the domain.
    pub fn dim(&self) -> usize {
        self.shape.len() / 2
    }

    /// Interpolated value; zero outside the box.
    pub fn eval(&self, w: &[C64]) -> C64 {
        let reals: Vec<f64> = w.iter().flat_map(|c| [c.re, c.im]).collect();
        let axes = self.shape.len();
        let mut base = vec![0usize; axes];
        let mut frac = vec![0.0; axes];
        for a in 0..axes {
            let x = reals.get(a).copied().unwrap_or(0.0);
            if !(x >= self.lower[a] && x <= self.upper[a]) {
                return C64::new(0.0, 0.0);
            }
            let t = (x - self.lower[a]) / (self.upper[a] - self.lower[a]) * (self.shape[a] - 1) as f64;
            let i = (t.floor() as usize).min(self.shape[a] - 2);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = C64::new(0.0, 0.0);
        for corner in 0..(1usize << axes) {
            let mut weight = 1.0;
            let mut offset = 0usize;
            for a in 0..axes {
                let bit = (corner >> (axes - 1 - a)) & 1;
                weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                offset = offset * self.shape[a] + base[a] + bit;
            }
            if weight != 0.0 {
                acc += self.values[offset] * weight;
            }
        }
        acc
    }
}
