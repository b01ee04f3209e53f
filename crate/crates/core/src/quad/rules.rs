//! Fixed cubature rules on the standard simplex.
//!
//! Every rule comes as a pair: a degree-7 rule for the estimate and a
//! degree-5 rule for the error. Nodes are strictly interior and weights are
//! positive and sum to 1; multiply by the simplex volume `1/d!`.

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Clone, Debug)]
pub struct Rule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Rule {
    fn from_table<const D: usize>(table: &[([f64; D], f64)]) -> Rule {
        Rule {
            dim: D,
            points: table.iter().map(|(p, _)| p.to_vec()).collect(),
            weights: table.iter().map(|(_, w)| *w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// The embedded pair `(high, low)` for `Δ_d`.
pub fn rule_pair(d: usize) -> (Rule, Rule) {
    match d {
        0 => {
            let r = Rule {
                dim: 0,
                points: vec![Vec::new()],
                weights: vec![1.0],
            };
            (r.clone(), r)
        }
        2 => (Rule::from_table(&TRIANGLE_DEG7), Rule::from_table(&TRIANGLE_DEG5)),
        3 => (Rule::from_table(&TETRAHEDRON_DEG7), Rule::from_table(&TETRAHEDRON_DEG5)),
        _ => (conical_product(d, 4), conical_product(d, 3)),
    }
}

/// Gauss–Jacobi nodes and normalised weights on `[0,1]` for the weight
/// `(1 − u)^alpha`, by the Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(m: usize, alpha: f64) -> Vec<(f64, f64)> {
    let (a, b) = (alpha, 0.0);
    let diag = |n: usize| -> f64 {
        let n = n as f64;
        if n == 0.0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * n + a + b) * (2.0 * n + a + b + 2.0))
        }
    };
    let off = |n: usize| -> f64 {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        (4.0 * n * (n + a) * (n + b) * (n + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
    };
    let jac = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            diag(i)
        } else if i + 1 == j {
            off(j)
        } else if j + 1 == i {
            off(i)
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut nodes: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            ((1.0 + x) / 2.0, v0 * v0)
        })
        .collect();
    nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total: f64 = nodes.iter().map(|n| n.1).sum();
    for n in &mut nodes {
        n.1 /= total;
    }
    nodes
}

/// Conical product rule with `m` points per direction, exact to degree
/// `2m − 1`. Uses `a_k = u_k Π_{j<k} (1 − u_j)`, whose Jacobian
/// `Π (1 − u_k)^{d−k}` is absorbed into Gauss–Jacobi weights.
pub fn conical_product(d: usize, m: usize) -> Rule {
    let factors: Vec<Vec<(f64, f64)>> = (1..=d).map(|k| gauss_jacobi(m, (d - k) as f64)).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let mut a = Vec::with_capacity(d);
        let mut rest = 1.0;
        let mut w = 1.0;
        for k in 0..d {
            let (u, wk) = factors[k][idx[k]];
            a.push(rest * u);
            rest *= 1.0 - u;
            w *= wk;
        }
        points.push(a);
        weights.push(w);
        let mut k = d;
        loop {
            if k == 0 {
                return Rule { dim: d, points, weights };
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub(crate) const TRIANGLE_DEG7: [([f64; 2], f64); 15] = [
    ([0.0644944549126531, 0.8710110901746938], 0.052365947931440324),
    ([0.8710110901746938, 0.0644944549126531], 0.052365947931440324),
    ([0.0644944549126531, 0.0644944549126531], 0.052365947931440324),
    ([0.4171753151723865, 0.165649369655227], 0.032035449112301044),
    ([0.165649369655227, 0.4171753151723865], 0.032035449112301044),
    ([0.4171753151723865, 0.4171753151723865], 0.032035449112301044),
    ([0.23516751187643248, 0.529664976247135], 0.10967237388983672),
    ([0.529664976247135, 0.23516751187643248], 0.10967237388983672),
    ([0.23516751187643248, 0.23516751187643248], 0.10967237388983672),
    ([0.31220359988117746, 0.043928331023551925], 0.06962978119987762),
    ([0.043928331023551925, 0.31220359988117746], 0.06962978119987762),
    ([0.6438680690952706, 0.043928331023551925], 0.06962978119987762),
    ([0.043928331023551925, 0.6438680690952706], 0.06962978119987762),
    ([0.6438680690952706, 0.31220359988117746], 0.06962978119987762),
    ([0.31220359988117746, 0.6438680690952706], 0.06962978119987762),
];
pub(crate) const TRIANGLE_DEG5: [([f64; 2], f64); 7] = [
    ([0.3333333333333333, 0.3333333333333333], 0.225),
    ([0.10128650732345634, 0.7974269853530873], 0.12593918054482714),
    ([0.7974269853530873, 0.10128650732345634], 0.12593918054482714),
    ([0.10128650732345634, 0.10128650732345634], 0.12593918054482714),
    ([0.4701420641051151, 0.05971587178976982], 0.1323941527885062),
    ([0.05971587178976982, 0.4701420641051151], 0.1323941527885062),
    ([0.4701420641051151, 0.4701420641051151], 0.1323941527885062),
];
pub(crate) const TETRAHEDRON_DEG7: [([f64; 3], f64); 35] = [
    ([0.25, 0.25, 0.25], 0.09548528946413085),
    ([0.3157011497782028, 0.3157011497782028, 0.0528965506653916], 0.04232958120996703),
    ([0.3157011497782028, 0.0528965506653916, 0.3157011497782028], 0.04232958120996703),
    ([0.0528965506653916, 0.3157011497782028, 0.3157011497782028], 0.04232958120996703),
    ([0.3157011497782028, 0.3157011497782028, 0.3157011497782028], 0.04232958120996703),
    ([0.05048982259839637, 0.44951017740160365, 0.44951017740160365], 0.03189692783285758),
    ([0.44951017740160365, 0.05048982259839637, 0.44951017740160365], 0.03189692783285758),
    ([0.44951017740160365, 0.44951017740160365, 0.05048982259839637], 0.03189692783285758),
    ([0.05048982259839637, 0.05048982259839637, 0.44951017740160365], 0.03189692783285758),
    ([0.05048982259839637, 0.44951017740160365, 0.05048982259839637], 0.03189692783285758),
    ([0.44951017740160365, 0.05048982259839637, 0.05048982259839637], 0.03189692783285758),
    ([0.18883383102600104, 0.047160700360997884, 0.5751716375870001], 0.03720713072833462),
    ([0.18883383102600104, 0.5751716375870001, 0.047160700360997884], 0.03720713072833462),
    ([0.047160700360997884, 0.18883383102600104, 0.5751716375870001], 0.03720713072833462),
    ([0.047160700360997884, 0.5751716375870001, 0.18883383102600104], 0.03720713072833462),
    ([0.5751716375870001, 0.18883383102600104, 0.047160700360997884], 0.03720713072833462),
    ([0.5751716375870001, 0.047160700360997884, 0.18883383102600104], 0.03720713072833462),
    ([0.18883383102600104, 0.18883383102600104, 0.5751716375870001], 0.03720713072833462),
    ([0.18883383102600104, 0.5751716375870001, 0.18883383102600104], 0.03720713072833462),
    ([0.5751716375870001, 0.18883383102600104, 0.18883383102600104], 0.03720713072833462),
    ([0.18883383102600104, 0.18883383102600104, 0.047160700360997884], 0.03720713072833462),
    ([0.18883383102600104, 0.047160700360997884, 0.18883383102600104], 0.03720713072833462),
    ([0.047160700360997884, 0.18883383102600104, 0.18883383102600104], 0.03720713072833462),
    ([0.021265472541483248, 0.14663881381848495, 0.8108302410985485], 0.008110770829903342),
    ([0.021265472541483248, 0.8108302410985485, 0.14663881381848495], 0.008110770829903342),
    ([0.14663881381848495, 0.021265472541483248, 0.8108302410985485], 0.008110770829903342),
    ([0.14663881381848495, 0.8108302410985485, 0.021265472541483248], 0.008110770829903342),
    ([0.8108302410985485, 0.021265472541483248, 0.14663881381848495], 0.008110770829903342),
    ([0.8108302410985485, 0.14663881381848495, 0.021265472541483248], 0.008110770829903342),
    ([0.021265472541483248, 0.021265472541483248, 0.8108302410985485], 0.008110770829903342),
    ([0.021265472541483248, 0.8108302410985485, 0.021265472541483248], 0.008110770829903342),
    ([0.8108302410985485, 0.021265472541483248, 0.021265472541483248], 0.008110770829903342),
    ([0.021265472541483248, 0.021265472541483248, 0.14663881381848495], 0.008110770829903342),
    ([0.021265472541483248, 0.14663881381848495, 0.021265472541483248], 0.008110770829903342),
    ([0.14663881381848495, 0.021265472541483248, 0.021265472541483248], 0.008110770829903342),
];
pub(crate) const TETRAHEDRON_DEG5: [([f64; 3], f64); 14] = [
    ([0.3108859192633006, 0.3108859192633006, 0.06734224221009817], 0.11268792571801585),
    ([0.3108859192633006, 0.06734224221009817, 0.3108859192633006], 0.11268792571801585),
    ([0.06734224221009817, 0.3108859192633006, 0.3108859192633006], 0.11268792571801585),
    ([0.3108859192633006, 0.3108859192633006, 0.3108859192633006], 0.11268792571801585),
    ([0.09273525031089122, 0.09273525031089122, 0.7217942490673264], 0.07349304311636196),
    ([0.09273525031089122, 0.7217942490673264, 0.09273525031089122], 0.07349304311636196),
    ([0.7217942490673264, 0.09273525031089122, 0.09273525031089122], 0.07349304311636196),
    ([0.09273525031089122, 0.09273525031089122, 0.09273525031089122], 0.07349304311636196),
    ([0.04550370412564965, 0.45449629587435036, 0.45449629587435036], 0.042546020777081466),
    ([0.45449629587435036, 0.04550370412564965, 0.45449629587435036], 0.042546020777081466),
    ([0.45449629587435036, 0.45449629587435036, 0.04550370412564965], 0.042546020777081466),
    ([0.04550370412564965, 0.04550370412564965, 0.45449629587435036], 0.042546020777081466),
    ([0.04550370412564965, 0.45449629587435036, 0.04550370412564965], 0.042546020777081466),
    ([0.45449629587435036, 0.04550370412564965, 0.04550370412564965], 0.042546020777081466),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// `∫_{Δ_d} Π a_i^{e_i} = Π e_i! / (d + Σ e_i)!` in barycentric form,
    /// including the implicit coordinate `1 − Σ a`.
    fn exact_monomial(exps: &[u32]) -> f64 {
        let d = exps.len() - 1;
        let num: f64 = exps.iter().map(|&e| factorial(e)).product();
        num / factorial(d as u32 + exps.iter().sum::<u32>())
    }

    fn apply(rule: &Rule, exps: &[u32]) -> f64 {
        let d = rule.dim;
        let volume = 1.0 / factorial(d as u32);
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| {
                let lambda0 = 1.0 - p.iter().sum::<f64>();
                let mut v = lambda0.powi(exps[0] as i32);
                for (x, e) in p.iter().zip(&exps[1..]) {
                    v *= x.powi(*e as i32);
                }
                w * v
            })
            .sum::<f64>()
            * volume
    }

    fn exponent_vectors(parts: usize, total: u32) -> Vec<Vec<u32>> {
        if parts == 1 {
            return vec![vec![total]];
        }
        (0..=total)
            .flat_map(|first| {
                exponent_vectors(parts - 1, total - first).into_iter().map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
            })
            .collect()
    }

    fn check_degree(rule: &Rule, degree: u32) {
        for total in 0..=degree {
            for exps in exponent_vectors(rule.dim + 1, total) {
                let got = apply(rule, &exps);
                let want = exact_monomial(&exps);
                assert!((got - want).abs() <= 1e-14 * want.max(1e-3), "dim {} monomial {exps:?}: {got} vs {want}", rule.dim);
            }
        }
    }

    #[test]
    fn pairs_are_exact_to_their_degree() {
        for d in 1..=5 {
            let (high, low) = rule_pair(d);
            check_degree(&high, 7);
            check_degree(&low, 5);
        }
    }

    #[test]
    fn nodes_interior_and_weights_positive() {
        for d in 1..=5 {
            let (high, low) = rule_pair(d);
            for rule in [&high, &low] {
                assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                assert!(rule.weights.iter().all(|w| *w > 0.0));
                for p in &rule.points {
                    assert!(p.iter().all(|x| *x > 0.0));
                    assert!(p.iter().sum::<f64>() < 1.0);
                }
            }
        }
    }

    #[test]
    fn seven_exact_is_not_eight_exact() {
        let (high, _) = rule_pair(2);
        let exps = [0, 8, 0];
        assert!((apply(&high, &exps) - exact_monomial(&exps)).abs() > 1e-12);
    }
}
