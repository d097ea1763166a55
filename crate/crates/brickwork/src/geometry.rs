//! Connectivity graphs and the routing pipeline: Hamiltonian paths with
//! distance-≤4 jumps on any connected graph, swap-network compilation of
//! jump gates onto native edges, and 1D-circuit-to-geometry transpilation.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gates::{Gate, NamedGate};
use crate::statevector::circuit_unitary;

/// An undirected connected graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Geometry {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!("edge ({a},{b}) outside 0..{n}")));
            }
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at {a}")));
            }
            normalized.insert((a.min(b), a.max(b)));
        }
        let g = Self { n, edges: normalized.into_iter().collect() };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn line(n: usize) -> Result<Self> {
        Self::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect())
    }

    pub fn ring(n: usize) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        Self::new(n, edges)
    }

    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    edges.push((r * cols + c, r * cols + c + 1));
                }
                if r + 1 < rows {
                    edges.push((r * cols + c, (r + 1) * cols + c));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    /// Parse an edge-list text file: one `u v` pair per line; blank lines and
    /// `#` comments ignored. Vertex count is `1 + max index` unless a first
    /// line `n <count>` pins it.
    pub fn from_edge_list_text(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n_decl: Option<usize> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let first = it.next().unwrap();
            if first == "n" {
                let v = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidInput("bad vertex-count line".into()))?;
                n_decl = Some(v);
                continue;
            }
            let a: usize = first
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad edge line: {line}")))?;
            let b: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad edge line: {line}")))?;
            edges.push((a, b));
        }
        let n = n_decl.unwrap_or_else(|| {
            edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0)
        });
        Self::new(n, edges)
    }

    pub fn to_edge_list_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(a, b) in &self.edges {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// BFS distances from `from`.
    pub fn distances_from(&self, from: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.n];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distances_from(a)[b]
    }

    /// One BFS shortest path from `a` to `b` (inclusive), with lexicographic
    /// tie-breaking: each vertex keeps the smallest-index predecessor that
    /// first reaches it.
    pub fn shortest_path(&self, a: usize, b: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let mut pred = vec![usize::MAX; self.n];
        let mut dist = vec![usize::MAX; self.n];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            // neighbors ascending: first assignment wins ties
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    pred[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![b];
        let mut at = b;
        while at != a {
            at = pred[at];
            path.push(at);
        }
        path.reverse();
        path
    }
}

/// A Hamiltonian path on the distance-4 neighborhood graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamPath {
    /// Visiting order; a permutation of the vertices.
    pub order: Vec<usize>,
    /// Graph distance of each consecutive step (`order.len() − 1` entries,
    /// every one ≤ 4).
    pub jump_distances: Vec<usize>,
}

struct DfsTree {
    children: Vec<Vec<usize>>,
}

fn dfs_tree(g: &Geometry, root: usize) -> DfsTree {
    let adj = g.adjacency();
    let mut children = vec![Vec::new(); g.num_vertices()];
    let mut visited = vec![false; g.num_vertices()];
    // iterative DFS; pushing neighbors in reverse keeps discovery ascending
    let mut stack = vec![(root, usize::MAX)];
    while let Some((v, parent)) = stack.pop() {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        if parent != usize::MAX {
            children[parent].push(v);
        }
        for &w in adj[v].iter().rev() {
            if !visited[w] {
                stack.push((w, v));
            }
        }
    }
    // children were recorded in discovery order; DFS discovery under a
    // sorted adjacency is not necessarily sorted per node, so fix the order
    for c in &mut children {
        c.sort_unstable();
    }
    DfsTree { children }
}

/// Path through a subtree that starts at `v` and ends at a child of `v`,
/// with all tree-distance jumps ≤ 4 and its second vertex at depth ≤ 2.
fn headpath(tree: &DfsTree, v: usize) -> Vec<usize> {
    let kids = &tree.children[v];
    let mut path = vec![v];
    if kids.is_empty() {
        return path;
    }
    for &c in &kids[..kids.len() - 1] {
        path.extend(headpath(tree, c));
    }
    let mut last = headpath(tree, kids[kids.len() - 1]);
    last.reverse();
    path.extend(last);
    path
}

/// Unconstrained-end path: plain descent through single-child spines, and a
/// rotated or reversed head path for the final child otherwise.
fn tailpath(tree: &DfsTree, v: usize) -> Vec<usize> {
    let kids = &tree.children[v];
    let mut path = vec![v];
    match kids.len() {
        0 => path,
        1 => {
            path.extend(tailpath(tree, kids[0]));
            path
        }
        _ => {
            for &c in &kids[..kids.len() - 1] {
                path.extend(headpath(tree, c));
            }
            let last_child = kids[kids.len() - 1];
            let head = headpath(tree, last_child);
            // rotating (first vertex moved to the end) keeps jumps ≤ 4 only
            // when the head's second vertex is a child of the subtree root;
            // otherwise reverse the head instead
            let rotate_safe =
                head.len() < 2 || tree.children[last_child].contains(&head[1]);
            if rotate_safe {
                let mut rotated: Vec<usize> = head[1..].to_vec();
                rotated.push(head[0]);
                path.extend(rotated);
            } else {
                path.extend(head.into_iter().rev());
            }
            path
        }
    }
}

/// Hamiltonian path on `G^{(4)}`: depth-first-search tree from `root`
/// (children in ascending vertex order), traversed so that every consecutive
/// pair is within graph distance 4.
pub fn hamiltonian_path_g4(g: &Geometry, root: usize) -> Result<HamPath> {
    if root >= g.num_vertices() {
        return Err(Error::InvalidInput(format!("root {root} out of range")));
    }
    let tree = dfs_tree(g, root);
    let order = tailpath(&tree, root);
    debug_assert_eq!(order.len(), g.num_vertices());
    let jump_distances = order
        .windows(2)
        .map(|w| g.distance(w[0], w[1]))
        .collect();
    Ok(HamPath { order, jump_distances })
}

impl HamPath {
    pub fn is_valid_for(&self, g: &Geometry) -> bool {
        let n = g.num_vertices();
        let mut seen = vec![false; n];
        if self.order.len() != n {
            return false;
        }
        for &v in &self.order {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        self.jump_distances.len() == n - 1 && self.jump_distances.iter().all(|&d| d <= 4)
    }
}

/// One native-edge operation in a swap schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScheduledOp {
    Swap { a: usize, b: usize },
    /// The logical two-qubit gate of `pair_index`, landed on edge `(a, b)`;
    /// `a` hosts the pair's first logical qubit.
    Logical { pair_index: usize, a: usize, b: usize },
}

impl ScheduledOp {
    fn vertices(&self) -> (usize, usize) {
        match self {
            ScheduledOp::Swap { a, b } | ScheduledOp::Logical { a, b, .. } => (*a, *b),
        }
    }
}

/// Layers of native-edge swaps plus embedded logical gate positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapSchedule {
    pub n: usize,
    pub layers: Vec<Vec<ScheduledOp>>,
    /// Number of colors in the pair-conflict coloring.
    pub colors_used: usize,
}

impl SwapSchedule {
    /// All ops land on edges of `g`, and every layer is qubit-disjoint.
    pub fn respects(&self, g: &Geometry) -> bool {
        for layer in &self.layers {
            let mut used = BTreeSet::new();
            for op in layer {
                let (a, b) = op.vertices();
                if !g.has_edge(a, b) {
                    return false;
                }
                if !used.insert(a) || !used.insert(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Instantiate into an executable circuit by substituting the logical
    /// gates (re-targeted to their landing edges).
    pub fn to_circuit(&self, gates: &[Gate]) -> Result<Circuit> {
        let mut circuit = Circuit::new(self.n);
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.len());
            for op in layer {
                match *op {
                    ScheduledOp::Swap { a, b } => {
                        out.push(Gate::named(vec![a, b], NamedGate::Swap)?)
                    }
                    ScheduledOp::Logical { pair_index, a, b } => {
                        let mut g = gates[pair_index].clone();
                        g.qubits = vec![a, b];
                        out.push(g);
                    }
                }
            }
            circuit.push_layer(out)?;
        }
        Ok(circuit)
    }
}

/// Compile one depth-1 layer of two-qubit gates on `G^{(4)}` (disjoint
/// vertex pairs, each within graph distance 4) into native-edge layers:
/// pairs whose shortest paths intersect are separated by greedy coloring,
/// and each colored group runs a palindromic swap-in / gate / swap-out
/// pattern along its shortest paths.
pub fn compile_depth1_on_g4(
    g: &Geometry,
    pairs: &[(usize, usize)],
) -> Result<SwapSchedule> {
    let mut used = BTreeSet::new();
    for &(u, v) in pairs {
        if !used.insert(u) || !used.insert(v) {
            return Err(Error::InvalidInput("pairs overlap".into()));
        }
    }
    let paths: Vec<Vec<usize>> = pairs
        .iter()
        .map(|&(u, v)| {
            let p = g.shortest_path(u, v);
            if p.len() - 1 > 4 {
                Err(Error::InvalidInput(format!(
                    "pair ({u},{v}) at distance {} > 4",
                    p.len() - 1
                )))
            } else {
                Ok(p)
            }
        })
        .collect::<Result<_>>()?;

    // conflict graph: pairs whose shortest paths share a vertex
    let k = pairs.len();
    let path_sets: Vec<BTreeSet<usize>> = paths.iter().map(|p| p.iter().copied().collect()).collect();
    let mut conflicts = vec![Vec::new(); k];
    for i in 0..k {
        for j in i + 1..k {
            if !path_sets[i].is_disjoint(&path_sets[j]) {
                conflicts[i].push(j);
                conflicts[j].push(i);
            }
        }
    }
    // greedy coloring: descending conflict degree, ties by index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(conflicts[i].len()), i));
    let mut color = vec![usize::MAX; k];
    let mut colors_used = 0;
    for &i in &order {
        let taken: BTreeSet<usize> = conflicts[i]
            .iter()
            .filter_map(|&j| (color[j] != usize::MAX).then_some(color[j]))
            .collect();
        let c = (0..).find(|c| !taken.contains(c)).unwrap();
        color[i] = c;
        colors_used = colors_used.max(c + 1);
    }

    let mut layers: Vec<Vec<ScheduledOp>> = Vec::new();
    for c in 0..colors_used {
        let group: Vec<usize> = (0..k).filter(|&i| color[i] == c).collect();
        let max_swaps = group
            .iter()
            .map(|&i| paths[i].len().saturating_sub(2))
            .max()
            .unwrap_or(0);
        // swap-in
        let mut swap_layers: Vec<Vec<ScheduledOp>> = vec![Vec::new(); max_swaps];
        for &i in &group {
            let p = &paths[i];
            for s in 0..p.len().saturating_sub(2) {
                swap_layers[s].push(ScheduledOp::Swap { a: p[s], b: p[s + 1] });
            }
        }
        for layer in &swap_layers {
            if !layer.is_empty() {
                layers.push(layer.clone());
            }
        }
        // logical gates
        let gate_layer: Vec<ScheduledOp> = group
            .iter()
            .map(|&i| {
                let p = &paths[i];
                ScheduledOp::Logical { pair_index: i, a: p[p.len() - 2], b: p[p.len() - 1] }
            })
            .collect();
        layers.push(gate_layer);
        // swap-out mirrors swap-in
        for layer in swap_layers.iter().rev() {
            if !layer.is_empty() {
                layers.push(layer.clone());
            }
        }
    }
    Ok(SwapSchedule { n: g.num_vertices(), layers, colors_used })
}

/// Result of transpiling a 1D-line circuit onto a geometry.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    /// `relabeling[line_position] = vertex`.
    pub relabeling: Vec<usize>,
    /// Compiled depth over original depth.
    pub depth_ratio: f64,
}

/// Transpile a nearest-neighbor 1D circuit onto geometry `g`: line
/// positions map onto a Hamiltonian path of `G^{(4)}`, and each layer's
/// now-distance-≤4 gates are compiled through [`compile_depth1_on_g4`].
pub fn compile_1d_to_geometry(circuit_1d: &Circuit, g: &Geometry) -> Result<CompiledCircuit> {
    let n = circuit_1d.n();
    if g.num_vertices() != n {
        return Err(Error::InvalidInput(format!(
            "geometry has {} vertices for an {n}-qubit circuit",
            g.num_vertices()
        )));
    }
    let path = hamiltonian_path_g4(g, 0)?;
    let relabel = &path.order;
    let mut out = Circuit::new(n);
    for layer in circuit_1d.layers() {
        let mut single_qubit: Vec<Gate> = Vec::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut pair_gates: Vec<Gate> = Vec::new();
        for gate in layer {
            match gate.qubits.as_slice() {
                [q] => {
                    let mut g2 = gate.clone();
                    g2.qubits = vec![relabel[*q]];
                    single_qubit.push(g2);
                }
                [a, b] if a.abs_diff(*b) == 1 => {
                    pairs.push((relabel[*a], relabel[*b]));
                    pair_gates.push(gate.clone());
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "compile_1d_to_geometry needs nearest-neighbor 1D gates".into(),
                    ))
                }
            }
        }
        if !single_qubit.is_empty() {
            out.push_layer(single_qubit)?;
        }
        if !pairs.is_empty() {
            let schedule = compile_depth1_on_g4(g, &pairs)?;
            out.extend(&schedule.to_circuit(&pair_gates)?)?;
        }
    }
    let depth_ratio = if circuit_1d.depth() == 0 {
        1.0
    } else {
        out.depth() as f64 / circuit_1d.depth() as f64
    };
    Ok(CompiledCircuit { circuit: out, relabeling: relabel.clone(), depth_ratio })
}

#[derive(Clone, Copy, Debug)]
pub struct EquivalenceReport {
    pub equal: bool,
    pub max_dev: f64,
}

/// Compare `compiled` against `original` conjugated by the relabeling
/// permutation, up to one global phase, by building both unitaries column
/// by column (n ≤ 12).
pub fn verify_compilation(
    original: &Circuit,
    compiled: &Circuit,
    relabeling: &[usize],
    tol: f64,
) -> Result<EquivalenceReport> {
    let n = original.n();
    if compiled.n() != n || relabeling.len() != n {
        return Err(Error::InvalidInput("width mismatch".into()));
    }
    let u_orig = circuit_unitary(original)?;
    let u_comp = circuit_unitary(compiled)?;
    let dim = 1usize << n;
    let permute = |x: usize| -> usize {
        let mut y = 0;
        for (i, &v) in relabeling.iter().enumerate() {
            if (x >> i) & 1 == 1 {
                y |= 1 << v;
            }
        }
        y
    };
    // M = R† U_comp R, entrywise gather
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let pc = permute(col);
        for row in 0..dim {
            m[(row, col)] = u_comp[(permute(row), pc)];
        }
    }
    // phase-align on the largest entry of u_orig
    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0;
    for r in 0..dim {
        for c in 0..dim {
            let v = u_orig[(r, c)].norm();
            if v > best_norm {
                best_norm = v;
                best = (r, c);
            }
        }
    }
    let phase = m[best] / u_orig[best];
    let max_dev = if (phase.norm() - 1.0).abs() > 0.5 {
        f64::INFINITY
    } else {
        let mut worst = 0.0_f64;
        for r in 0..dim {
            for c in 0..dim {
                worst = worst.max((m[(r, c)] - phase * u_orig[(r, c)]).norm());
            }
        }
        worst
    };
    Ok(EquivalenceReport { equal: max_dev <= tol, max_dev })
}

/// Random connected graph with bounded degree: a random incremental tree
/// plus a few extra edges, all degrees ≤ `max_degree`.
pub fn random_connected_graph<R: rand::Rng>(
    n: usize,
    max_degree: usize,
    rng: &mut R,
) -> Result<Geometry> {
    if n == 0 || max_degree < 2 {
        return Err(Error::InvalidInput("need n ≥ 1 and max degree ≥ 2".into()));
    }
    let mut deg = vec![0usize; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let candidates: Vec<usize> = (0..v).filter(|&u| deg[u] < max_degree).collect();
        let u = candidates[rng.gen_range(0..candidates.len())];
        edges.push((u, v));
        deg[u] += 1;
        deg[v] += 1;
    }
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b
            && deg[a] < max_degree
            && deg[b] < max_degree
            && !edges.contains(&(a.min(b), a.max(b)))
        {
            edges.push((a.min(b), a.max(b)));
            deg[a] += 1;
            deg[b] += 1;
        }
    }
    Geometry::new(n, edges)
}
