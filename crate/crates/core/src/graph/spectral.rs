use nalgebra::SymmetricEigen;
use num_rational::Ratio;
use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Largest vertex count accepted by [`cheeger_exact`].
pub const CHEEGER_MAX_N: usize = 22;

/// Exact Cheeger constant `h(G) = min |∂U| / |U|` over `1 <= |U| <= n/2`.
///
/// Walks all vertex subsets in Gray-code order, updating `|∂U|` in O(1)
/// per step from neighbour bitmasks.
pub fn cheeger_exact(g: &Graph) -> Result<Ratio<u64>> {
    let n = g.n();
    if n > CHEEGER_MAX_N {
        return Err(Error::SizeLimit(format!("exact Cheeger constant needs n <= {CHEEGER_MAX_N}, got {n}")));
    }
    if n < 2 {
        return Err(Error::Precondition("Cheeger constant needs at least two vertices".into()));
    }
    let nbr = g.neighbor_masks();
    let deg: Vec<i64> = g.degrees().iter().map(|&d| d as i64).collect();
    let half = n / 2;

    let mut set: u64 = 0;
    let mut size = 0usize;
    let mut boundary: i64 = 0;
    // best = best_num / best_den
    let (mut best_num, mut best_den) = (u64::MAX, 1u64);
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let bit = 1u64 << v;
        if set & bit == 0 {
            boundary += deg[v] - 2 * i64::from((nbr[v] & set).count_ones());
            set |= bit;
            size += 1;
        } else {
            set &= !bit;
            boundary -= deg[v] - 2 * i64::from((nbr[v] & set).count_ones());
            size -= 1;
        }
        if size >= 1 && size <= half {
            let b = boundary as u64;
            if (b as u128) * (best_den as u128) < (best_num as u128) * (size as u128) {
                best_num = b;
                best_den = size as u64;
            }
        }
    }
    Ok(Ratio::new(best_num, best_den))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lambda2 {
    pub value: f64,
    pub disconnected: bool,
}

/// Algebraic connectivity: second-smallest eigenvalue of the Laplacian.
///
/// Disconnected graphs report `0` with the `disconnected` flag set.
pub fn lambda2(g: &Graph) -> Result<Lambda2> {
    if g.n() < 2 {
        return Err(Error::Precondition("algebraic connectivity needs at least two vertices".into()));
    }
    if !g.is_connected() {
        return Ok(Lambda2 { value: 0.0, disconnected: true });
    }
    let eig = SymmetricEigen::new(g.laplacian());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(Lambda2 { value: values[1].max(0.0), disconnected: false })
}
