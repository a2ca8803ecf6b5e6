//! Independent oracles shared by the integration tests. None of these call
//! into the code paths they check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use fairtransport::ontology::{Comparator, ConceptExpr, FactStore, Ontology};
use fairtransport::Decimal;
use num::{BigRational, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- ontology

/// Does `individual` satisfy `expr` in `facts`, read literally off the sets.
pub fn direct_entails(expr: &ConceptExpr, individual: &str, facts: &FactStore) -> bool {
    match expr {
        ConceptExpr::Atomic(c) => facts.concept_facts.contains(&(c.clone(), individual.to_string())),
        ConceptExpr::ExistsNominal { role, individual: obj } => {
            facts
                .role_facts
                .contains(&(role.clone(), individual.to_string(), obj.clone()))
        }
        ConceptExpr::ExistsConcept { role, concept } => facts.role_facts.iter().any(|(r, s, o)| {
            r == role && s == individual && facts.concept_facts.contains(&(concept.clone(), o.clone()))
        }),
        ConceptExpr::DataThreshold {
            property,
            comparator,
            threshold,
        } => facts
            .data_facts
            .get(&(property.clone(), individual.to_string()))
            .is_some_and(|v| {
                let (v, t) = (v.as_rational(), threshold.as_rational());
                match comparator {
                    Comparator::Lt => v < t,
                    Comparator::Le => v <= t,
                    Comparator::Gt => v > t,
                    Comparator::Ge => v >= t,
                    Comparator::Eq => v == t,
                }
            }),
        ConceptExpr::Conjunction(parts) => parts.iter().all(|p| direct_entails(p, individual, facts)),
    }
}

/// Every individual mentioned by any fact.
pub fn universe(facts: &FactStore) -> BTreeSet<String> {
    let mut u = facts.individuals.clone();
    u.extend(facts.concept_facts.iter().map(|(_, i)| i.clone()));
    for (_, s, o) in &facts.role_facts {
        u.insert(s.clone());
        u.insert(o.clone());
    }
    u.extend(facts.data_facts.keys().map(|(_, i)| i.clone()));
    u
}

/// Re-scan every axiom against every individual until nothing changes.
pub fn naive_materialize(ontology: &Ontology, facts: &FactStore) -> FactStore {
    let mut out = facts.clone();
    let individuals = universe(facts);
    loop {
        let mut changed = false;
        for axiom in &ontology.tbox {
            for ind in &individuals {
                if direct_entails(&axiom.lhs, ind, &out)
                    && out.concept_facts.insert((axiom.rhs.clone(), ind.clone()))
                {
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

/// A random ontology (as source text) and ABox over a small vocabulary.
pub struct RandomKb {
    pub source: String,
    pub facts: FactStore,
}

pub fn random_kb(rng: &mut ChaCha8Rng, max_axioms: usize, max_individuals: usize) -> RandomKb {
    let concepts: Vec<String> = (0..6).map(|i| format!("C{i}")).collect();
    let roles = ["r", "s"];
    let props = ["p", "q"];
    let n_ind = rng.random_range(2..=max_individuals);
    let individuals: Vec<String> = (0..n_ind).map(|i| format!("i{i}")).collect();
    let nominals = &individuals[..n_ind.min(3)];

    let mut src = String::new();
    for c in &concepts {
        if rng.random_bool(0.3) {
            src.push_str("sensitive ");
        }
        src.push_str(&format!("concept {c}.\n"));
    }
    for r in roles {
        src.push_str(&format!("role {r}.\n"));
    }
    for p in props {
        src.push_str(&format!("data {p}.\n"));
    }
    for a in nominals {
        src.push_str(&format!("individual {a}.\n"));
    }
    let cmps = ["<", "<=", ">", ">=", "="];
    let term = |rng: &mut ChaCha8Rng| -> String {
        match rng.random_range(0..4) {
            0 => concepts.choose(rng).unwrap().clone(),
            1 => format!("exists({}, {{{}}})", roles.choose(rng).unwrap(), nominals.choose(rng).unwrap()),
            2 => format!("exists({}, {})", roles.choose(rng).unwrap(), concepts.choose(rng).unwrap()),
            _ => format!(
                "{} {} {}.{}",
                props.choose(rng).unwrap(),
                cmps.choose(rng).unwrap(),
                rng.random_range(0..10),
                rng.random_range(0..10)
            ),
        }
    };
    let n_axioms = rng.random_range(1..=max_axioms);
    for _ in 0..n_axioms {
        let k = rng.random_range(1..=3);
        let lhs: Vec<String> = (0..k).map(|_| term(rng)).collect();
        let rhs = concepts.choose(rng).unwrap();
        src.push_str(&format!("axiom {} => {rhs}.\n", lhs.join(" and ")));
    }

    let mut facts = FactStore::new();
    for a in &individuals {
        facts.add_individual(a.clone());
        for _ in 0..rng.random_range(0..=2) {
            facts.add_concept(concepts.choose(rng).unwrap().clone(), a.clone());
        }
        for p in props {
            if rng.random_bool(0.5) {
                let v: Decimal = format!("{}.{}", rng.random_range(0..10), rng.random_range(0..10))
                    .parse()
                    .unwrap();
                facts.add_data(p, a.clone(), v).unwrap();
            }
        }
    }
    for _ in 0..rng.random_range(n_ind..=3 * n_ind) {
        let s = individuals.choose(rng).unwrap().clone();
        let o = individuals.choose(rng).unwrap().clone();
        facts.add_role(*roles.choose(rng).unwrap(), s, o);
    }
    RandomKb { source: src, facts }
}

// ------------------------------------------------------------------- sigma

/// All distinct row sets reachable from the generator columns with up to
/// `depth` rounds of complement, union and intersection. Rows are bits of a
/// `u64`, so `n ≤ 64`.
pub fn boolean_closure(columns: &[u64], n: usize, depth: usize) -> BTreeSet<u64> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut sets: BTreeSet<u64> = columns.iter().copied().collect();
    sets.insert(0);
    sets.insert(full);
    for _ in 0..depth {
        let current: Vec<u64> = sets.iter().copied().collect();
        for &a in &current {
            sets.insert(!a & full);
            for &b in &current {
                sets.insert(a & b);
                sets.insert(a | b);
            }
        }
    }
    sets
}

// --------------------------------------------------------------- transport

pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("representable")
}

/// Exact column means per group, rounded once at the end.
pub fn exact_group_means(rows: &[Vec<f64>], labels: &[usize], n_groups: usize) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    (0..n_groups)
        .map(|g| {
            let members: Vec<&Vec<f64>> = rows.iter().zip(labels).filter(|(_, &l)| l == g).map(|(r, _)| r).collect();
            (0..d)
                .map(|j| {
                    let s = members.iter().fold(BigRational::zero(), |acc, r| acc + exact(r[j]));
                    to_f64(&(s / BigRational::from_integer(members.len().into())))
                })
                .collect()
        })
        .collect()
}

/// `Σ (x − y)² / N` in exact arithmetic.
pub fn exact_mse(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let s = x
        .iter()
        .zip(y)
        .flat_map(|(a, b)| a.iter().zip(b))
        .fold(BigRational::zero(), |acc, (a, b)| {
            let d = exact(*a) - exact(*b);
            acc + &d * &d
        });
    to_f64(&(s / BigRational::from_integer(x.len().into())))
}

/// Exact optimal transport cost by enumerating the basic feasible solutions
/// of the transportation polytope: every choice of `n + m − 1` cells that
/// forms a spanning tree of the bipartite row/column graph determines a
/// unique flow; the optimum is the cheapest non-negative one.
pub fn exact_ot_cost(cost: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let k = n + m - 1;
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(k);
    fn rec(
        start: usize,
        k: usize,
        cells: &[(usize, usize)],
        chosen: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        if chosen.len() == k {
            visit(chosen);
            return;
        }
        for idx in start..cells.len() {
            if cells.len() - idx < k - chosen.len() {
                break;
            }
            chosen.push(cells[idx]);
            rec(idx + 1, k, cells, chosen, visit);
            chosen.pop();
        }
    }
    let mut visit = |tree: &[(usize, usize)]| {
        if let Some(flow) = tree_flow(tree, a, b) {
            if flow.iter().all(|&f| f >= -1e-12) {
                let c: f64 = tree.iter().zip(&flow).map(|(&(i, j), f)| f * cost[i][j]).sum();
                best = best.min(c);
            }
        }
    };
    rec(0, k, &cells, &mut chosen, &mut visit);
    best
}

/// Flows on a spanning tree meeting the marginals, found by repeatedly
/// peeling leaves. `None` if the cells do not form a spanning tree.
fn tree_flow(tree: &[(usize, usize)], a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut supply: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut alive = vec![true; tree.len()];
    let mut flow = vec![0.0; tree.len()];
    let node = |c: (usize, usize)| (c.0, n + c.1);
    for _ in 0..tree.len() {
        let mut degree = vec![0usize; supply.len()];
        for (e, &c) in tree.iter().enumerate() {
            if alive[e] {
                let (u, v) = node(c);
                degree[u] += 1;
                degree[v] += 1;
            }
        }
        let (e, leaf) = tree.iter().enumerate().filter(|(e, _)| alive[*e]).find_map(|(e, &c)| {
            let (u, v) = node(c);
            if degree[u] == 1 {
                Some((e, u))
            } else if degree[v] == 1 {
                Some((e, v))
            } else {
                None
            }
        })?;
        let (u, v) = node(tree[e]);
        let other = if leaf == u { v } else { u };
        flow[e] = supply[leaf];
        supply[other] -= supply[leaf];
        supply[leaf] = 0.0;
        alive[e] = false;
    }
    // A spanning tree on n + m nodes consumes every supply exactly.
    supply.iter().all(|s| s.abs() < 1e-9).then_some(flow)
}

/// Minimum of `Σ (x_i − y_i)² / N` over outputs whose within-atom empirical
/// laws are all equal, for equal atom sizes, by trying every rank matching.
pub fn brute_force_equal_law_cost(x: &[f64], labels: &[usize]) -> f64 {
    let n_groups = labels.iter().max().unwrap() + 1;
    let groups: Vec<Vec<f64>> = (0..n_groups)
        .map(|g| x.iter().zip(labels).filter(|(_, &l)| l == g).map(|(v, _)| *v).collect())
        .collect();
    let size = groups[0].len();
    assert!(groups.iter().all(|g| g.len() == size));
    let perms = permutations(size);
    let mut best = f64::INFINITY;
    // Atom 0 fixes slot order; every other atom picks a matching to the slots.
    let mut choice = vec![0usize; n_groups];
    loop {
        let mut total = 0.0;
        for slot in 0..size {
            let vals: Vec<f64> = (0..n_groups)
                .map(|g| if g == 0 { groups[0][slot] } else { groups[g][perms[choice[g]][slot]] })
                .collect();
            let z = vals.iter().sum::<f64>() / n_groups as f64;
            total += vals.iter().map(|v| (v - z) * (v - z)).sum::<f64>();
        }
        best = best.min(total / x.len() as f64);
        // Odometer over the non-fixed atoms.
        let mut g = 1;
        while g < n_groups {
            choice[g] += 1;
            if choice[g] < perms.len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
        if g == n_groups {
            return best;
        }
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// 1-d W2 between two empirical laws by expanding both onto the common grid
/// of `lcm(n_a, n_b)` equal-mass points.
pub fn w2_by_expansion(a: &[f64], b: &[f64]) -> f64 {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let l = a.len() / gcd(a.len(), b.len()) * b.len();
    let s: f64 = (0..l)
        .map(|t| {
            let d = a[t * a.len() / l] - b[t * b.len() / l];
            d * d
        })
        .sum();
    (s / l as f64).sqrt()
}

/// Exact optimal transport cost for integer masses (`a = supply / U`,
/// `b = demand / U`) by successive shortest augmenting paths on the
/// bipartite residual network. Returns the cost of the normalized plan.
pub fn min_cost_flow_cost(cost: &[Vec<f64>], supply: &[u64], demand: &[u64]) -> f64 {
    let (n, m) = (supply.len(), demand.len());
    let total: u64 = supply.iter().sum();
    assert_eq!(total, demand.iter().sum::<u64>());
    let mut flow = vec![vec![0u64; m]; n];
    let mut out = supply.to_vec();
    let mut room = demand.to_vec();
    // Node ids: rows 0..n, columns n..n+m. The source feeds rows with `out`
    // left; the sink drains columns with `room` left.
    // Relaxations must beat the current label by more than rounding noise,
    // or float error can close a spurious negative cycle.
    let tol = 1e-12 * cost.iter().flatten().fold(1.0f64, |a, &c| a.max(c.abs())) * (n + m) as f64;
    loop {
        let mut dist = vec![f64::INFINITY; n + m];
        let mut prev = vec![usize::MAX; n + m];
        for i in 0..n {
            if out[i] > 0 {
                dist[i] = 0.0;
            }
        }
        for _ in 0..n + m {
            let mut relaxed = false;
            for i in 0..n {
                if dist[i].is_finite() {
                    for j in 0..m {
                        if dist[i] + cost[i][j] < dist[n + j] - tol {
                            dist[n + j] = dist[i] + cost[i][j];
                            prev[n + j] = i;
                            relaxed = true;
                        }
                    }
                }
            }
            for j in 0..m {
                if dist[n + j].is_finite() {
                    for i in 0..n {
                        if flow[i][j] > 0 && dist[n + j] - cost[i][j] < dist[i] - tol {
                            dist[i] = dist[n + j] - cost[i][j];
                            prev[i] = n + j;
                            relaxed = true;
                        }
                    }
                }
            }
            if !relaxed {
                break;
            }
        }
        let Some(end) = (0..m)
            .filter(|&j| room[j] > 0 && dist[n + j].is_finite())
            .min_by(|&x, &y| dist[n + x].total_cmp(&dist[n + y]))
        else {
            break;
        };
        // Walk back to a source row, collecting the bottleneck.
        let mut path = Vec::new();
        let mut v = n + end;
        while prev[v] != usize::MAX {
            assert!(path.len() <= n + m, "cycle in shortest-path tree");
            path.push((prev[v], v));
            v = prev[v];
        }
        let mut amount = out[v].min(room[end]);
        for &(u, w) in &path {
            if u >= n {
                amount = amount.min(flow[w][u - n]);
            }
        }
        for &(u, w) in &path {
            if u < n {
                flow[u][w - n] += amount;
            } else {
                flow[w][u - n] -= amount;
            }
        }
        out[v] -= amount;
        room[end] -= amount;
    }
    assert!(out.iter().all(|&s| s == 0), "flow incomplete");
    let c: f64 = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| flow[i][j] as f64 * cost[i][j]).sum();
    c / total as f64
}
