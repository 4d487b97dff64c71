//! Smith normal form for small square integer matrices, tracking the generator change.

use crate::error::{Error, Result};

/// Result of diagonalizing a relation matrix `R` for generators `g`.
///
/// The group `⟨g | R g = 0⟩` equals `⊕ ℤ/diag[j]` with new generators
/// `h_j = Σ_i w[j][i] g_i`.
#[derive(Debug, Clone)]
pub(crate) struct Smith {
    pub diag: Vec<i128>,
    pub w: Vec<Vec<i128>>,
}

fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow("Smith normal form"))
}

pub(crate) fn smith(mut a: Vec<Vec<i128>>) -> Result<Smith> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    let mut w: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();

    for t in 0..n {
        loop {
            // Pivot: smallest nonzero magnitude in the trailing block.
            let mut pivot = None;
            for i in t..n {
                for j in t..n {
                    let v = a[i][j].unsigned_abs();
                    if v != 0 && pivot.is_none_or(|(_, _, best)| v < best) {
                        pivot = Some((i, j, v));
                    }
                }
            }
            let Some((pi, pj, _)) = pivot else { break };
            a.swap(t, pi);
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                w.swap(t, pj);
            }

            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t] / a[t][t];
                if q != 0 {
                    for j in t..n {
                        a[i][j] = ck(a[i][j].checked_sub(ck(q.checked_mul(a[t][j]))?))?;
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..n {
                let q = a[t][j] / a[t][t];
                if q != 0 {
                    // column j -= q · column t, so generator row t absorbs q · row j
                    for row in a.iter_mut().skip(t) {
                        row[j] = ck(row[j].checked_sub(ck(q.checked_mul(row[t]))?))?;
                    }
                    for k in 0..n {
                        w[t][k] = ck(w[t][k].checked_add(ck(q.checked_mul(w[j][k]))?))?;
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            let d = a[t][t];
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[i][j] % d != 0));
            match bad {
                Some(i) => {
                    for j in t..n {
                        a[t][j] = ck(a[t][j].checked_add(a[i][j]))?;
                    }
                }
                None => break,
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i].abs()).collect();
    Ok(Smith { diag, w })
}
