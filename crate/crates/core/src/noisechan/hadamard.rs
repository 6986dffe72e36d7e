use std::ops::{Add, Sub};

use ndarray::Array2;

use super::NoiseError;
use crate::numeric::fwht;

/// Largest qubit count for dense Hadamard conjugation.
pub const MAX_HADAMARD_QUBITS: usize = 14;

/// `H^{(x)N} M H^{(x)N}` with the normalised Hadamard, via fast
/// Walsh-Hadamard butterflies on rows then columns.
pub fn hadamard_conjugate(m: &Array2<f64>) -> Result<Array2<f64>, NoiseError> {
    let (rows, cols) = m.dim();
    if rows != cols || !rows.is_power_of_two() {
        return Err(NoiseError::NotSquarePow2 { rows, cols });
    }
    let n = rows.trailing_zeros() as usize;
    if n > MAX_HADAMARD_QUBITS {
        return Err(NoiseError::TooManyQubits { n, limit: MAX_HADAMARD_QUBITS });
    }
    let mut data: Vec<f64> = m.iter().copied().collect();
    conjugate_in_place(&mut data, rows);
    let scale = 1.0 / rows as f64;
    Ok(Array2::from_shape_vec((rows, cols), data.into_iter().map(|x| x * scale).collect())
        .expect("shape preserved"))
}

/// Unnormalised conjugation of a row-major `dim x dim` buffer; the result
/// carries an extra factor `dim`.
pub(crate) fn conjugate_in_place<T>(data: &mut [T], dim: usize)
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    for row in data.chunks_mut(dim) {
        fwht(row);
    }
    let mut column = Vec::with_capacity(dim);
    for c in 0..dim {
        column.clear();
        column.extend((0..dim).map(|r| data[r * dim + c]));
        fwht(&mut column);
        for (r, v) in column.iter().enumerate() {
            data[r * dim + c] = *v;
        }
    }
}
