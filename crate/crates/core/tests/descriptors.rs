mod common;

use std::collections::{BTreeMap, HashMap};

use molinfer::chemgraph::TwoLayerDecomposition;
use molinfer::descriptors::{
    count_adjacency_configs, count_chemical_symbols, count_edge_configs, tree_code,
    AdjacencyConfiguration, DescriptorRegistry, Normalizer,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fixtures, random_graph, random_permutation, table};

fn check_identities(d: &TwoLayerDecomposition) {
    let ac = count_adjacency_configs(d);
    let ec = count_edge_configs(d);
    let ns = count_chemical_symbols(d);
    let edges = d.interior_edges().len() as u32;
    assert_eq!(ac.values().sum::<u32>(), edges);
    assert_eq!(ec.values().sum::<u32>(), edges);
    assert_eq!(ns.values().sum::<u32>(), d.interior().len() as u32);
    let mut projected: BTreeMap<AdjacencyConfiguration, u32> = BTreeMap::new();
    for (gamma, c) in &ec {
        let nu = gamma.adjacency();
        let nu = AdjacencyConfiguration::canonical(nu.a, nu.b, nu.m);
        *projected.entry(nu).or_insert(0) += c;
    }
    assert_eq!(projected, ac);
}

#[test]
fn fixture_identities_and_isomorphism_invariance() {
    let all: Vec<_> = fixtures().into_iter().map(|(_, g)| g).collect();
    for rho in 1..=3 {
        let reg = DescriptorRegistry::build(&all, rho, &table()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(rho));
        for (name, g) in fixtures() {
            check_identities(&TwoLayerDecomposition::new(&g, rho).unwrap());
            let x = reg.featurize(&g, rho).unwrap();
            for _ in 0..50 {
                let perm = random_permutation(g.atom_count(), &mut rng);
                let y = reg.featurize(&g.permuted(&perm), rho).unwrap();
                assert_eq!(x, y, "{name} rho={rho}");
            }
        }
    }
}

/// All rooted trees with `n` vertices as parent arrays (`parent[i] < i`),
/// labels from `alphabet` and bond multiplicities 1 or 2.
fn rooted_trees(n: usize, alphabet: &[&'static str]) -> Vec<(Vec<&'static str>, Vec<(usize, u8)>)> {
    let mut shapes: Vec<Vec<usize>> = vec![vec![]];
    for i in 1..n {
        shapes = shapes
            .into_iter()
            .flat_map(|s| (0..i).map(move |p| { let mut t = s.clone(); t.push(p); t }))
            .collect();
    }
    let mut out = Vec::new();
    let labelings = alphabet.len().pow(n as u32);
    let multiplicities = 1usize << (n - 1);
    for shape in &shapes {
        for l in 0..labelings {
            let labels: Vec<&str> = (0..n).map(|i| alphabet[(l / alphabet.len().pow(i as u32)) % alphabet.len()]).collect();
            for m in 0..multiplicities {
                let links = shape
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (p, 1 + ((m >> i) & 1) as u8))
                    .collect();
                out.push((labels.clone(), links));
            }
        }
    }
    out
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut p in permutations(rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Smallest description over all relabelings fixing the root; equal iff the
/// trees are isomorphic as rooted, labeled trees.
fn brute_force_form(labels: &[&str], links: &[(usize, u8)], perms: &[Vec<usize>]) -> Vec<(String, String, u8)> {
    let n = labels.len();
    perms
        .iter()
        .map(|perm| {
            // perm maps non-root vertex i (1-based) to position perm[i-1] + 1
            let pos = |v: usize| if v == 0 { 0 } else { perm[v - 1] + 1 };
            let mut edges: Vec<(String, String, u8)> = links
                .iter()
                .enumerate()
                .map(|(i, &(p, m))| (format!("{}:{}", pos(p), labels[p]), format!("{}:{}", pos(i + 1), labels[i + 1]), m))
                .collect();
            edges.push((String::new(), format!("0:{}", labels[0]), 0));
            edges.sort();
            let _ = n;
            edges
        })
        .min()
        .unwrap()
}

#[test]
fn fringe_codes_match_brute_force_isomorphism() {
    let alphabet = ["C", "N", "O"];
    let mut checked = 0;
    for n in 1..=5 {
        let perms = permutations((0..n - 1).collect());
        let trees = rooted_trees(n, &alphabet);
        let mut by_form: HashMap<Vec<(String, String, u8)>, String> = HashMap::new();
        let mut by_code: HashMap<String, Vec<(String, String, u8)>> = HashMap::new();
        for (labels, links) in &trees {
            let mut children = vec![Vec::new(); n];
            for (i, &(p, m)) in links.iter().enumerate() {
                children[p].push((i + 1, m));
            }
            let code = tree_code(labels, &children, 0);
            let form = brute_force_form(labels, links, &perms);
            assert_eq!(by_form.entry(form.clone()).or_insert_with(|| code.clone()), &code);
            assert_eq!(by_code.entry(code).or_insert_with(|| form.clone()), &form);
            checked += 1;
        }
        assert_eq!(by_form.len(), by_code.len());
    }
    assert!(checked > 90_000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_graph_identities_and_invariance(seed in any::<u64>(), rho in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 14, 3);
        let d = TwoLayerDecomposition::new(&g, rho).unwrap();
        check_identities(&d);
        let reg = DescriptorRegistry::build(&[g.clone()], rho, &table()).unwrap();
        let x = reg.featurize(&g, rho).unwrap();
        let perm = random_permutation(g.atom_count(), &mut rng);
        let h = g.permuted(&perm);
        prop_assert_eq!(&x, &reg.featurize(&h, rho).unwrap());
        prop_assert_eq!(reg.ids(), DescriptorRegistry::build(&[h], rho, &table()).unwrap().ids());
    }

    #[test]
    fn normalization_lands_in_unit_box_and_inverts(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 1..12)
    ) {
        let n = Normalizer::fit(&rows).unwrap();
        for r in &rows {
            let s = n.transform(r).unwrap();
            prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
            let back = n.inverse(&s).unwrap();
            for (j, (a, b)) in r.iter().zip(&back).enumerate() {
                let (lo, hi) = n.ranges()[j];
                if hi > lo {
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()) * 1e3);
                } else {
                    prop_assert_eq!(s[j], 0.0);
                }
            }
        }
    }
}
