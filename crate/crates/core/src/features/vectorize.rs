use nalgebra::DMatrix;

use super::correntropy::CorrentropyMatrix;
use crate::error::{Error, Result};

/// Length of the strict lower triangle of a `dim x dim` matrix.
pub const fn lower_len(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// The fixed walk over the strict lower triangle: rows `i = 1..dim` outer, columns
/// `j = 0..i` inner. Feature index `k` is the position in this sequence.
pub fn lower_walk(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..dim).flat_map(|i| (0..i).map(move |j| (i, j)))
}

/// Feature index of cell `(i, j)`, `j < i`.
pub const fn lower_index(i: usize, j: usize) -> usize {
    i * (i - 1) / 2 + j
}

/// Cell `(i, j)` addressed by feature index `k`.
pub fn lower_cell(k: usize) -> (usize, usize) {
    // largest i with i(i-1)/2 <= k
    let mut i = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as usize;
    while lower_index(i, 0) > k {
        i -= 1;
    }
    while lower_index(i + 1, 0) <= k {
        i += 1;
    }
    (i, k - lower_index(i, 0))
}

/// Flattens the strict lower triangle in walk order.
pub fn vectorize_lower(k: &CorrentropyMatrix) -> Vec<f64> {
    let v = k.values();
    lower_walk(k.dim()).map(|(i, j)| v[(i, j)]).collect()
}

/// Rebuilds the full symmetric matrix from a walk-ordered vector, unit diagonal.
pub fn unvectorize(values: &[f64], dim: usize) -> Result<DMatrix<f64>> {
    if values.len() != lower_len(dim) {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: lower_len(dim),
        });
    }
    let mut m = DMatrix::<f64>::identity(dim, dim);
    for ((i, j), &v) in lower_walk(dim).zip(values) {
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::correntropy::correntropy_matrix_of;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_size_is_1770() {
        assert_eq!(lower_len(60), 1770);
        assert_eq!(lower_walk(60).count(), 1770);
    }

    #[test]
    fn three_by_three_order() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 10.0, 1.0, 0.0, 20.0, 21.0, 1.0]);
        let k = CorrentropyMatrix::from_lower(m, 12.0, 1).unwrap();
        assert_eq!(vectorize_lower(&k), vec![10.0, 20.0, 21.0]);
    }

    #[test]
    fn all_ones() {
        let k = CorrentropyMatrix::from_lower(DMatrix::from_element(60, 60, 1.0), 12.0, 1).unwrap();
        let v = vectorize_lower(&k);
        assert_eq!(v.len(), 1770);
        assert!(v.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn index_cell_bijection() {
        for (k, (i, j)) in lower_walk(60).enumerate() {
            assert_eq!(lower_index(i, j), k);
            assert_eq!(lower_cell(k), (i, j));
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = DMatrix::from_fn(6, 60, |_, _| rng.random_range(-30.0..30.0));
        let k = correntropy_matrix_of(&data, 12.0).unwrap();
        let back = unvectorize(&vectorize_lower(&k), 60).unwrap();
        assert_eq!(&back, k.values());
    }

    #[test]
    fn permutation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = 8;
        for _ in 0..20 {
            let data = DMatrix::from_fn(5, d, |_, _| rng.random_range(-20.0..20.0));
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut rng);
            let permuted = DMatrix::from_fn(5, d, |r, c| data[(r, perm[c])]);
            let k = correntropy_matrix_of(&data, 12.0).unwrap();
            let kp = correntropy_matrix_of(&permuted, 12.0).unwrap();
            let v = vectorize_lower(&k);
            let vp = vectorize_lower(&kp);
            for ((i, j), &val) in lower_walk(d).zip(&vp) {
                let (a, b) = (perm[i].max(perm[j]), perm[i].min(perm[j]));
                assert_eq!(val, v[lower_index(a, b)]);
            }
        }
    }
}
