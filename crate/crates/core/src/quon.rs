//! Quon algebra on small Fock spaces.
//!
//! Operators obey `a_k a†_l − q a†_l a_k = δ_kl` with `a_k |0⟩ = 0`. At
//! `q = 1` this is the bosonic algebra, at `q = −1` the fermionic one, and
//! the doubly occupied single-mode state `a†_k a†_k |0⟩` has squared norm
//! `1 + q`, vanishing exactly in the fermionic limit.
//!
//! Vacuum expectation values are evaluated by normal ordering: the rightmost
//! annihilator is commuted through the creation string,
//!
//! ```text
//! a_k a†_{l1} … a†_{ln} |0⟩ = Σ_j q^j δ_{k,l(j+1)} a†_{l1} … (omit l(j+1)) … a†_{ln} |0⟩
//! ```
//!
//! and the recursion is memoized on (annihilator string, creator string).

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_PARTICLES: usize = 4;
pub const MAX_MODES: usize = 4;

/// `a†_{m1} … a†_{mn}` acting on the vacuum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CreationString {
    modes: Vec<u8>,
}

impl CreationString {
    pub fn new(modes: &[usize], n_modes: usize) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid(
                "modes",
                "creation string must contain at least one operator",
            ));
        }
        if n_modes > u8::MAX as usize {
            return Err(Error::SizeCap(format!("{n_modes} modes")));
        }
        if let Some(&bad) = modes.iter().find(|&&k| k >= n_modes) {
            return Err(Error::invalid("modes", format!("mode {bad} outside [0, {n_modes})")));
        }
        Ok(Self {
            modes: modes.iter().map(|&k| k as u8).collect(),
        })
    }

    pub fn modes(&self) -> Vec<usize> {
        self.modes.iter().map(|&k| k as usize).collect()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            modes: self.modes.iter().rev().copied().collect(),
        }
    }

    /// `a†_0 a†_1` style label.
    pub fn label(&self) -> String {
        self.modes
            .iter()
            .map(|k| format!("a+{k}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::invalid("q", format!("must lie in [-1, 1], got {q}")));
    }
    Ok(())
}

type Memo = HashMap<(Vec<u8>, Vec<u8>), f64>;

fn vacuum_amplitude(ann: &[u8], cre: &[u8], q: f64, memo: &mut Memo) -> f64 {
    if ann.len() != cre.len() {
        return 0.0;
    }
    if ann.is_empty() {
        return 1.0;
    }
    let key = (ann.to_vec(), cre.to_vec());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let (&k, rest) = ann.split_last().unwrap();
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut reduced = Vec::with_capacity(cre.len() - 1);
    for (j, &l) in cre.iter().enumerate() {
        if l == k && weight != 0.0 {
            reduced.clear();
            reduced.extend_from_slice(&cre[..j]);
            reduced.extend_from_slice(&cre[j + 1..]);
            total += weight * vacuum_amplitude(rest, &reduced, q, memo);
        }
        weight *= q;
    }
    memo.insert(key, total);
    total
}

/// `⟨0| a_{k1} … a_{kn} a†_{l1} … a†_{ln} |0⟩` with `left = (k1 … kn)` and
/// `right = (l1 … ln)`. Strings of different length give 0.
pub fn inner_product(left: &CreationString, right: &CreationString, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(vacuum_amplitude(&left.modes, &right.modes, q, &mut Memo::new()))
}

/// All `n_modes^n_particles` creation strings in lexicographic order.
pub fn basis(n_particles: usize, n_modes: usize) -> Result<Vec<CreationString>> {
    if n_particles == 0 || n_modes == 0 {
        return Err(Error::invalid("gram_matrix", "need at least one particle and one mode"));
    }
    if n_particles > MAX_PARTICLES || n_modes > MAX_MODES {
        return Err(Error::SizeCap(format!(
            "{n_particles} particles over {n_modes} modes; caps are {MAX_PARTICLES} and {MAX_MODES}"
        )));
    }
    let size = n_modes.pow(n_particles as u32);
    Ok((0..size)
        .map(|mut idx| {
            let mut modes = vec![0u8; n_particles];
            for slot in modes.iter_mut().rev() {
                *slot = (idx % n_modes) as u8;
                idx /= n_modes;
            }
            CreationString { modes }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub basis: Vec<CreationString>,
    pub entries: DMatrix<f64>,
    pub q: f64,
}

impl GramMatrix {
    /// Gram matrix of an explicit list of equal-length states,
    /// `G[i][j] = ⟨b_i|b_j⟩`.
    pub fn from_states(states: Vec<CreationString>, q: f64) -> Result<Self> {
        check_q(q)?;
        let n = states.len();
        let mut memo = Memo::new();
        let mut entries = DMatrix::zeros(n, n);
        let occupation: Vec<Vec<u8>> = states
            .iter()
            .map(|s| {
                let mut k = s.modes.clone();
                k.sort_unstable();
                k
            })
            .collect();
        for i in 0..n {
            // bra of a†_{m1}…a†_{mn}|0⟩ is ⟨0|a_{mn}…a_{m1}
            let bra = states[i].reversed();
            for j in i..n {
                if occupation[i] != occupation[j] {
                    continue;
                }
                let v = vacuum_amplitude(&bra.modes, &states[j].modes, q, &mut memo);
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Ok(Self {
            basis: states,
            entries,
            q,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }

    /// Eigenvalues in ascending order.
    ///
    /// States with different mode multisets are orthogonal, so the matrix is
    /// diagonalized one occupation block at a time.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut blocks: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
        for (i, s) in self.basis.iter().enumerate() {
            let mut key = s.modes.clone();
            key.sort_unstable();
            blocks.entry(key).or_default().push(i);
        }
        let mut ev = Vec::with_capacity(self.dim());
        for idx in blocks.values() {
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])]);
            ev.extend(symmetric_eigenvalues(&block));
        }
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn gram_matrix(n_particles: usize, n_modes: usize, q: f64) -> Result<GramMatrix> {
    GramMatrix::from_states(basis(n_particles, n_modes)?, q)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(gram: &GramMatrix) -> f64 {
    gram.eigenvalues()[0]
}

/// Squared norm `1 + q` of the doubly occupied single-mode state.
pub fn exclusion_defect(q: f64) -> Result<f64> {
    let pair = CreationString { modes: vec![0, 0] };
    inner_product(&pair, &pair, q)
}
