//! Fixtures and independent reference implementations shared by the
//! integration tests. Nothing here calls into the library's algorithms.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use collabnet::graph::Graph;
use collabnet::ingest::TablePaths;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Writes a CORDIS-shaped programme of `projects` random projects and returns
/// the table paths.
pub fn write_synthetic_programme(dir: &Path, projects: usize, seed: u64) -> TablePaths {
    let mut r = rng(seed);
    let mut proj = String::from("projID;acronym;title;startDate;endDate;callID;objectiveText\n");
    let mut part = String::from("projID;orgID;orgName;countryCode;role;totalCost;netEcContribution\n");
    let mut topics = String::from("projID;topicLabel\n");
    let countries = ["IT", "DE", "FR", "ES", "NL", "BE"];
    for p in 0..projects {
        let id = format!("{}", 100_000 + p);
        let start = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + Duration::days(r.random_range(0..3000));
        let end = start + Duration::days(r.random_range(0..1600));
        writeln!(proj, "{id};P{p};Project {p};{start};{end};CALL-{};Objective {p}", p % 7).unwrap();
        let k = r.random_range(1..=8);
        let mut orgs: Vec<usize> = (0..40).collect();
        for i in 0..k {
            let j = r.random_range(i..orgs.len());
            orgs.swap(i, j);
        }
        for (i, &o) in orgs[..k].iter().enumerate() {
            let total = r.random_range(10_000.0..2_000_000.0f64).round();
            let net = if r.random_bool(0.1) { 0.0 } else { (total * r.random_range(0.3..1.0f64)).round() };
            let role = if i == 0 { "coordinator" } else { "participant" };
            writeln!(part, "{id};{};Org {o};{};{role};{total};{net}", 900_000_000 + o, countries[o % countries.len()]).unwrap();
        }
        writeln!(topics, "{id};{}", if p % 3 == 0 { "hydrogen energy" } else { "fuel cells" }).unwrap();
    }
    let paths = TablePaths {
        projects: dir.join("project.csv"),
        participations: dir.join("organization.csv"),
        topics: dir.join("euroSciVoc.csv"),
    };
    std::fs::write(&paths.projects, proj).unwrap();
    std::fs::write(&paths.participations, part).unwrap();
    std::fs::write(&paths.topics, topics).unwrap();
    paths
}

/// Per-year share of `[start, end]` by walking every day.
pub fn day_count_fractions(start: NaiveDate, end: NaiveDate) -> BTreeMap<i32, f64> {
    let mut days: BTreeMap<i32, u32> = BTreeMap::new();
    let mut d = start;
    let mut total = 0u32;
    while d <= end {
        *days.entry(d.year()).or_insert(0) += 1;
        total += 1;
        d = d.succ_opt().unwrap();
    }
    days.into_iter().map(|(y, n)| (y, n as f64 / total as f64)).collect()
}

/// Erdős–Rényi graph with random weights; node ids `v000..`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph<f64> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random_bool(p) {
                edges.push((format!("v{i:03}"), format!("v{j:03}"), r.random_range(0.1..5.0)));
            }
        }
    }
    let mut b = collabnet::graph::GraphBuilder::new(2020);
    for i in 0..n {
        b.add_node(&format!("v{i:03}"));
    }
    for (u, v, w) in &edges {
        b.add_edge(u, v, *w).unwrap();
    }
    b.build()
}

/// Core numbers by repeated k-core extraction.
pub fn peeling_coreness(g: &Graph<f64>) -> Vec<usize> {
    let n = g.node_count();
    let mut core = vec![0; n];
    let mut k = 1;
    loop {
        let mut alive = vec![true; n];
        loop {
            let mut removed = false;
            for v in 0..n {
                if alive[v] && g.neighbors(v).iter().filter(|(u, _)| alive[*u]).count() < k {
                    alive[v] = false;
                    removed = true;
                }
            }
            if !removed {
                break;
            }
        }
        if !alive.iter().any(|&a| a) {
            return core;
        }
        for v in 0..n {
            if alive[v] {
                core[v] = k;
            }
        }
        k += 1;
    }
}

/// Two weighted cliques joined by one or two light bridges.
pub fn planted_two_cliques(seed: u64) -> Graph<f64> {
    let mut r = rng(seed);
    let a = r.random_range(3..=7);
    let b = r.random_range(3..=(10 - a).min(7));
    let mut edges = Vec::new();
    for (prefix, size) in [("a", a), ("b", b)] {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((format!("{prefix}{i}"), format!("{prefix}{j}"), r.random_range(1.0..2.0)));
            }
        }
    }
    let bridges = r.random_range(1..=2);
    for k in 0..bridges {
        edges.push((format!("a{k}"), format!("b{}", (k + 1) % b), r.random_range(0.05..0.2)));
    }
    Graph::from_weighted_edges(2020, &edges).unwrap()
}

/// Dense adjacency, strengths and 2m of `g`.
pub fn dense(g: &Graph<f64>) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for e in g.edges() {
        a[e.a][e.b] += e.weight;
        a[e.b][e.a] += e.weight;
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m = k.iter().sum();
    (a, k, two_m)
}

fn modularity_dense(a: &[Vec<f64>], k: &[f64], two_m: f64, labels: &[usize]) -> f64 {
    let mut q = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Modularity straight from the definition `1/2m Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j)`.
pub fn definition_modularity(g: &Graph<f64>, labels: &[usize]) -> f64 {
    let (a, k, two_m) = dense(g);
    modularity_dense(&a, &k, two_m, labels)
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            grow(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    grow(&mut vec![0], 0, n, &mut out);
    out
}

/// Exhaustive maximum-modularity partition and the runner-up value.
pub fn brute_force_best(g: &Graph<f64>) -> (Vec<usize>, f64, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    let mut second = f64::NEG_INFINITY;
    let (a, k, two_m) = dense(g);
    for labels in set_partitions(g.node_count()) {
        let q = modularity_dense(&a, &k, two_m, &labels);
        if q > best.1 {
            second = best.1;
            best = (labels, q);
        } else if q > second {
            second = q;
        }
    }
    (best.0, best.1, second)
}

/// Adjusted Rand Index by explicit pair counting.
pub fn pair_counting_ari(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len();
    let (mut both, mut only_x, mut only_y, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (x[i] == x[j], y[i] == y[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_x += 1.0,
                (false, true) => only_y += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total: f64 = both + only_x + only_y + neither;
    let expected = (both + only_x) * (both + only_y) / total;
    let max = ((both + only_x) + (both + only_y)) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// Regularised incomplete beta by composite Simpson quadrature of the density.
pub fn beta_cdf_quadrature(a: f64, b: f64, x: f64) -> f64 {
    let steps = 20_000;
    let ln_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    // Endpoint values are the densities' limits; they are finite for a, b >= 1.
    let f = |t: f64| {
        if t <= 0.0 {
            if a == 1.0 { ln_norm.exp() } else { 0.0 }
        } else if t >= 1.0 {
            if b == 1.0 { ln_norm.exp() } else { 0.0 }
        } else {
            (ln_norm + (a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln()).exp()
        }
    };
    let h = x / steps as f64;
    let mut s = f(0.0) + f(x);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Lanczos approximation of ln Γ.
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Ring of `k` triangles; consecutive triangles are joined by one bridge.
pub fn triangle_ring(k: usize, bridge: f64) -> Graph<f64> {
    let mut edges = Vec::new();
    for t in 0..k {
        let v = |i: usize| format!("t{t}v{i}");
        edges.push((v(0), v(1), 1.0));
        edges.push((v(1), v(2), 1.0));
        edges.push((v(0), v(2), 1.0));
        edges.push((v(2), format!("t{}v0", (t + 1) % k), bridge));
    }
    Graph::from_weighted_edges(2020, &edges).unwrap()
}

/// Two K5 cliques joined by a 0.1 bridge.
pub fn two_k5() -> Graph<f64> {
    let mut edges = Vec::new();
    for p in ["a", "b"] {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push((format!("{p}{i}"), format!("{p}{j}"), 1.0));
            }
        }
    }
    edges.push(("a0".into(), "b0".into(), 0.1));
    Graph::from_weighted_edges(2020, &edges).unwrap()
}
