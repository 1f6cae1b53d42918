use std::fmt;

use thiserror::Error;

use crate::Scalar;

/// Largest `|μ_ij + μ_ji − 1|` silently repaired on load. Real datasets are
/// usually published rounded to two or three decimals.
pub const COMPLEMENT_TOLERANCE: f64 = 1e-6;

/// Rows and columns in errors are 1-based, matching file positions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("preference matrix must have at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("row {} has {found} entries, expected {expected}", .row + 1)]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("entry at row {}, column {} is {value}, outside [0, 1]", .row + 1, .col + 1)]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error(
        "complement violation at row {}, column {}: mu_ij + mu_ji = {sum}",
        .row + 1,
        .col + 1
    )]
    ComplementViolation { row: usize, col: usize, sum: f64 },
    #[error("no Condorcet winner: no arm beats every other arm with probability > 1/2")]
    NoCondorcetWinner,
}

/// Validated `K×K` matrix of win probabilities `μ_ij = P(i ≻ j)` with a
/// unique Condorcet winner.
///
/// After validation the complement identity `μ_ij + μ_ji = 1` holds exactly:
/// the lower triangle is rebuilt from the upper one and the diagonal is 1/2.
#[derive(Clone, PartialEq)]
pub struct PreferenceMatrix<F> {
    k: usize,
    mu: Vec<F>,
    winner: usize,
}

impl<F: Scalar> PreferenceMatrix<F> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Index of the Condorcet winner. Arms are never relabeled.
    pub fn winner(&self) -> usize {
        self.winner
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.mu[i * self.k + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[F]> {
        self.mu.chunks(self.k)
    }

    /// Gap `Δ_i = μ_wi − 1/2` of every arm relative to the winner `w`.
    pub fn gaps(&self) -> Vec<F> {
        (0..self.k)
            .map(|i| self.get(self.winner, i) - F::half())
            .collect()
    }

    /// Gaps of the suboptimal arms only, in index order.
    pub fn suboptimal_gaps(&self) -> Vec<F> {
        self.gaps()
            .into_iter()
            .enumerate()
            .filter(|&(i, _)| i != self.winner)
            .map(|(_, g)| g)
            .collect()
    }

    /// Converts every entry to another scalar type, re-running validation.
    pub fn cast<G: Scalar>(&self) -> Result<PreferenceMatrix<G>, MatrixError> {
        let rows: Vec<Vec<G>> = self
            .rows()
            .map(|r| r.iter().map(|&x| G::of(x.as_f64())).collect())
            .collect();
        validate_matrix(&rows)
    }
}

impl<F: fmt::Debug> fmt::Debug for PreferenceMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PreferenceMatrix")
            .field("k", &self.k)
            .field("winner", &self.winner)
            .field("mu", &self.mu.chunks(self.k).collect::<Vec<_>>())
            .finish()
    }
}

/// Checks shape, range, complement symmetry and the Condorcet condition.
///
/// Complement deviations up to [`COMPLEMENT_TOLERANCE`] are normalized using
/// the upper triangle; larger deviations are rejected.
pub fn validate_matrix<F: Scalar, R: AsRef<[F]>>(
    raw: &[R],
) -> Result<PreferenceMatrix<F>, MatrixError> {
    let k = raw.len();
    if k < 2 {
        return Err(MatrixError::TooFewArms(k));
    }
    for (row, r) in raw.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != k {
            return Err(MatrixError::NotSquare {
                row,
                expected: k,
                found: r.len(),
            });
        }
        for (col, &x) in r.iter().enumerate() {
            if !(x >= F::zero() && x <= F::one()) {
                return Err(MatrixError::OutOfRange {
                    row,
                    col,
                    value: x.as_f64(),
                });
            }
        }
    }

    let tol = F::of(COMPLEMENT_TOLERANCE);
    for i in 0..k {
        for j in i..k {
            let sum = raw[i].as_ref()[j] + raw[j].as_ref()[i];
            if (sum - F::one()).abs() > tol {
                // report the lower-triangle cell, i.e. the first one read row-major
                let (row, col) = if i == j { (i, j) } else { (j, i) };
                return Err(MatrixError::ComplementViolation {
                    row,
                    col,
                    sum: sum.as_f64(),
                });
            }
        }
    }

    let mut mu = vec![F::half(); k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            let upper = raw[i].as_ref()[j];
            mu[i * k + j] = upper;
            mu[j * k + i] = F::one() - upper;
        }
    }

    let half = F::half();
    let mut winners = (0..k).filter(|&i| (0..k).all(|j| j == i || mu[i * k + j] > half));
    let winner = winners.next().ok_or(MatrixError::NoCondorcetWinner)?;
    // strict dominance of one row excludes a second dominating row
    debug_assert!(winners.next().is_none());

    Ok(PreferenceMatrix { k, mu, winner })
}
