use vipsim_core::quon::{basis, exclusion_defect, gram_matrix, inner_product, min_eigenvalue, CreationString};

const TOL: f64 = 1e-10;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

fn inversions(p: &[usize]) -> u32 {
    let mut c = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                c += 1;
            }
        }
    }
    c
}

/// ⟨a|b⟩ as a sum of q^inv(π) over permutations mapping one mode list onto the other.
fn permutation_oracle(a: &[usize], b: &[usize], q: f64) -> f64 {
    permutations(a.len())
        .iter()
        .filter(|p| p.iter().enumerate().all(|(k, &pk)| a[pk] == b[k]))
        .map(|p| q.powi(inversions(p) as i32))
        .sum()
}

const Q_GRID: [f64; 9] = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0];

#[test]
fn gram_entries_match_permutation_sum() {
    for n in 1..=4 {
        for m in 1..=3 {
            for q in Q_GRID {
                let g = gram_matrix(n, m, q).unwrap();
                for i in 0..g.dim() {
                    for j in 0..g.dim() {
                        let oracle = permutation_oracle(&g.basis[i].modes(), &g.basis[j].modes(), q);
                        assert!((g.entries[(i, j)] - oracle).abs() < TOL, "n={n} m={m} q={q} ({i},{j})");
                    }
                }
            }
        }
    }
}

#[test]
fn gram_is_symmetric_and_positive_semidefinite() {
    for n in 1..=4 {
        for m in 1..=4 {
            for q in Q_GRID {
                let g = gram_matrix(n, m, q).unwrap();
                assert!(g.is_symmetric());
                assert!(min_eigenvalue(&g) >= -TOL, "n={n} m={m} q={q}: {}", min_eigenvalue(&g));
            }
        }
    }
}

#[test]
fn interior_q_is_strictly_positive() {
    for n in 1..=4 {
        for m in 1..=4 {
            for q in [-0.9, -0.5, 0.0, 0.5, 0.9] {
                let g = gram_matrix(n, m, q).unwrap();
                assert!(min_eigenvalue(&g) > TOL, "n={n} m={m} q={q}: {}", min_eigenvalue(&g));
            }
        }
    }
}

#[test]
fn boundary_q_has_null_states() {
    for n in 2..=4 {
        for m in 1..=4 {
            let g = gram_matrix(n, m, -1.0).unwrap();
            assert!(min_eigenvalue(&g).abs() < TOL, "q=-1 n={n} m={m}");
            if m >= 2 {
                let g = gram_matrix(n, m, 1.0).unwrap();
                assert!(min_eigenvalue(&g).abs() < TOL, "q=1 n={n} m={m}");
            }
        }
    }
    // a single mode has one symmetric state of norm n!
    let g = gram_matrix(3, 1, 1.0).unwrap();
    assert!((g.entries[(0, 0)] - 6.0).abs() < TOL);
}

#[test]
fn zero_q_gives_orthonormal_strings() {
    for n in 1..=4 {
        for m in 1..=3 {
            let g = gram_matrix(n, m, 0.0).unwrap();
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((g.entries[(i, j)] - id).abs() < TOL);
                }
            }
        }
    }
}

#[test]
fn exchange_sign_and_exclusion() {
    let ab = CreationString::new(&[0, 1], 2).unwrap();
    let ba = CreationString::new(&[1, 0], 2).unwrap();
    let gram = |q| gram_matrix(2, 2, q).unwrap();
    // basis is lexicographic: 00, 01, 10, 11
    assert!((gram(-1.0).entries[(1, 2)] + 1.0).abs() < TOL);
    assert!((gram(1.0).entries[(1, 2)] - 1.0).abs() < TOL);
    assert_eq!(gram(0.3).basis[1], ab);
    assert_eq!(gram(0.3).basis[2], ba);
    for q in Q_GRID {
        assert!((exclusion_defect(q).unwrap() - (1.0 + q)).abs() < TOL);
    }
    assert!(exclusion_defect(-1.0).unwrap().abs() < TOL);
    for i in 0..4 {
        for j in 0..4 {
            assert!(gram(1.0).entries[(i, j)] >= 0.0);
        }
    }
}

#[test]
fn inner_product_of_unequal_lengths_vanishes() {
    let a = CreationString::new(&[0], 2).unwrap();
    let b = CreationString::new(&[0, 1], 2).unwrap();
    assert_eq!(inner_product(&a, &b, 0.5).unwrap(), 0.0);
}

#[test]
fn caps_and_domain_are_enforced() {
    assert!(gram_matrix(5, 2, 0.0).is_err());
    assert!(gram_matrix(2, 5, 0.0).is_err());
    assert!(gram_matrix(2, 2, 1.01).is_err());
    assert!(gram_matrix(2, 2, -1.5).is_err());
    assert_eq!(basis(4, 4).unwrap().len(), 256);
}

#[test]
fn eigenvalues_are_finite_and_sum_to_trace() {
    for q in Q_GRID {
        let g = gram_matrix(4, 4, q).unwrap();
        let ev = g.eigenvalues();
        assert_eq!(ev.len(), 256);
        assert!(ev.iter().all(|x| x.is_finite()), "q={q}");
        let sum: f64 = ev.iter().sum();
        assert!((sum - g.entries.trace()).abs() < 1e-9 * g.entries.trace().abs().max(1.0));
    }
}
