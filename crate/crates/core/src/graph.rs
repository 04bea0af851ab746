//! Undirected graphs, spanning-tree edge orderings, signed incidence matrices
//! and the cut-space basis `R = [I  T]`.
//!
//! Node ids are 1-based and contiguous. Every edge is stored as `(i, j)` with
//! `i < j`, and its incidence column is `e_i - e_j`.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An undirected edge `(i, j)` with `i < j`, 1-based.
pub type Edge = (usize, usize);

fn normalize((a, b): Edge) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A connected simple graph on nodes `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    /// Lexicographically sorted.
    edges: Vec<Edge>,
    /// Ascending neighbor lists, indexed by `node - 1`.
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph. Pairs may be given in either orientation.
    pub fn new(node_count: usize, edge_pairs: &[Edge]) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edge_pairs.len());
        let mut edges = Vec::with_capacity(edge_pairs.len());
        for &(a, b) in edge_pairs {
            if a == 0 || b == 0 || a > node_count || b > node_count {
                return Err(Error::NodeOutOfRange(a, b, node_count));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = normalize((a, b));
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            edges.push(e);
        }
        edges.sort_unstable();

        let mut adjacency = vec![Vec::new(); node_count];
        for &(i, j) in &edges {
            adjacency[i - 1].push(j);
            adjacency[j - 1].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let g = Graph {
            n: node_count,
            edges,
            adjacency,
        };
        if let Some(unreached) = g.bfs_order().1 {
            return Err(Error::DisconnectedGraph(unreached));
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Ascending neighbor ids of `node` (1-based).
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node - 1]
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        self.edges.binary_search(&normalize(e)).is_ok()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.n - 1
    }

    /// Unweighted degrees, indexed by `node - 1`.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// BFS from node 1 visiting neighbors in ascending order. Returns the tree
    /// edges in discovery order and the first unreachable node, if any.
    fn bfs_order(&self) -> (Vec<Edge>, Option<usize>) {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([1usize]);
        visited[0] = true;
        let mut tree = Vec::with_capacity(self.n - 1);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u - 1] {
                if !visited[v - 1] {
                    visited[v - 1] = true;
                    tree.push(normalize((u, v)));
                    queue.push_back(v);
                }
            }
        }
        let unreached = visited.iter().position(|&seen| !seen).map(|i| i + 1);
        (tree, unreached)
    }
}

/// Free-function form of [`Graph::new`].
pub fn build_graph(node_count: usize, edge_pairs: &[Edge]) -> Result<Graph> {
    Graph::new(node_count, edge_pairs)
}

/// Free-function form of [`Graph::degrees`].
pub fn degrees(g: &Graph) -> Vec<usize> {
    g.degrees()
}

/// Edge indexing `κ`: positions `0..tree_count` hold the spanning-tree edges,
/// the remainder hold cycle edges in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOrdering {
    edges: Vec<Edge>,
    tree_count: usize,
    index: HashMap<Edge, usize>,
}

impl EdgeOrdering {
    fn from_tree(g: &Graph, tree: Vec<Edge>) -> Self {
        let in_tree: HashSet<Edge> = tree.iter().copied().collect();
        let tree_count = tree.len();
        let mut edges = tree;
        edges.extend(g.edges().iter().filter(|e| !in_tree.contains(e)));
        let index = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        EdgeOrdering {
            edges,
            tree_count,
            index,
        }
    }

    /// Edges in `κ` order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn tree_edges(&self) -> &[Edge] {
        &self.edges[..self.tree_count]
    }

    pub fn cycle_edges(&self) -> &[Edge] {
        &self.edges[self.tree_count..]
    }

    pub fn tree_count(&self) -> usize {
        self.tree_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Zero-based position of an edge (either orientation).
    pub fn index_of(&self, e: Edge) -> Option<usize> {
        self.index.get(&normalize(e)).copied()
    }
}

/// Deterministic breadth-first spanning tree rooted at node 1.
pub fn spanning_tree(g: &Graph) -> EdgeOrdering {
    let (tree, _) = g.bfs_order();
    EdgeOrdering::from_tree(g, tree)
}

/// Ordering that places the supplied tree edges first, in the given order.
pub fn spanning_tree_from(g: &Graph, tree_edges: &[Edge]) -> Result<EdgeOrdering> {
    let n = g.node_count();
    if tree_edges.len() != n - 1 {
        return Err(Error::NotASpanningTree(format!(
            "expected {} edges, got {}",
            n - 1,
            tree_edges.len()
        )));
    }
    // union-find over node ids
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n - 1);
    for &pair in tree_edges {
        let e = normalize(pair);
        if !g.contains_edge(e) {
            return Err(Error::NotASpanningTree(format!(
                "({}, {}) is not an edge of the graph",
                e.0, e.1
            )));
        }
        let (ra, rb) = (find(&mut parent, e.0 - 1), find(&mut parent, e.1 - 1));
        if ra == rb {
            return Err(Error::NotASpanningTree(format!(
                "({}, {}) closes a cycle",
                e.0, e.1
            )));
        }
        parent[ra] = rb;
        tree.push(e);
    }
    Ok(EdgeOrdering::from_tree(g, tree))
}

/// Signed incidence matrix with columns in `κ` order, split into tree and
/// cycle blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceDecomposition {
    pub d: DMatrix<f64>,
    pub d_tree: DMatrix<f64>,
    pub d_cycle: DMatrix<f64>,
}

impl IncidenceDecomposition {
    pub fn node_count(&self) -> usize {
        self.d.nrows()
    }

    pub fn edge_count(&self) -> usize {
        self.d.ncols()
    }

    pub fn tree_count(&self) -> usize {
        self.d_tree.ncols()
    }
}

pub fn incidence(g: &Graph, ord: &EdgeOrdering) -> IncidenceDecomposition {
    let n = g.node_count();
    let m = ord.edge_count();
    let mut d = DMatrix::zeros(n, m);
    for (k, &(i, j)) in ord.edges().iter().enumerate() {
        d[(i - 1, k)] = 1.0;
        d[(j - 1, k)] = -1.0;
    }
    let t = ord.tree_count();
    let d_tree = d.columns(0, t).into_owned();
    let d_cycle = d.columns(t, m - t).into_owned();
    IncidenceDecomposition { d, d_tree, d_cycle }
}

/// `T` maps tree-edge states to cycle-edge states; `R = [I  T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutBasis {
    pub t_tree_cycle: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

pub fn cut_basis(inc: &IncidenceDecomposition) -> Result<CutBasis> {
    let t = inc.tree_count();
    let c = inc.d_cycle.ncols();
    let gram = inc.d_tree.transpose() * &inc.d_tree;
    let chol = gram.cholesky().ok_or(Error::SingularTreeGram)?;
    let t_tree_cycle = chol.solve(&(inc.d_tree.transpose() * &inc.d_cycle));

    let residual = (&inc.d_tree * &t_tree_cycle - &inc.d_cycle).amax();
    if residual > 1e-10 {
        // the cycle columns are not in the range of the tree columns
        return Err(Error::SingularTreeGram);
    }

    let mut r = DMatrix::zeros(t, t + c);
    r.view_mut((0, 0), (t, t)).fill_with_identity();
    r.view_mut((0, t), (t, c)).copy_from(&t_tree_cycle);
    Ok(CutBasis { t_tree_cycle, r })
}

/// Everything derived from a graph and one choice of spanning tree.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: Graph,
    pub ordering: EdgeOrdering,
    pub incidence: IncidenceDecomposition,
    pub cut: CutBasis,
}

impl Network {
    /// Uses the default breadth-first spanning tree.
    pub fn new(graph: Graph) -> Result<Self> {
        let ordering = spanning_tree(&graph);
        Self::with_ordering(graph, ordering)
    }

    pub fn with_tree(graph: Graph, tree_edges: &[Edge]) -> Result<Self> {
        let ordering = spanning_tree_from(&graph, tree_edges)?;
        Self::with_ordering(graph, ordering)
    }

    fn with_ordering(graph: Graph, ordering: EdgeOrdering) -> Result<Self> {
        let incidence = incidence(&graph, &ordering);
        let cut = cut_basis(&incidence)?;
        Ok(Network {
            graph,
            ordering,
            incidence,
            cut,
        })
    }

    /// Reorders a per-edge quantity from lexicographic graph order into `κ`
    /// order.
    pub fn to_kappa_order(&self, per_graph_edge: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(per_graph_edge.len());
        for (value, &e) in per_graph_edge.iter().zip(self.graph.edges()) {
            out[self.ordering.index_of(e).expect("edge in ordering")] = *value;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(1, 2), (2, 3), (1, 3)]).unwrap()
    }

    fn six_node_tree() -> Graph {
        Graph::new(6, &[(1, 2), (2, 3), (3, 4), (3, 5), (3, 6)]).unwrap()
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(Graph::new(0, &[]), Err(Error::EmptyGraph));
        assert_eq!(Graph::new(1, &[]), Err(Error::EmptyGraph));
        assert_eq!(Graph::new(3, &[(1, 1), (1, 2)]), Err(Error::SelfLoop(1)));
        assert_eq!(
            Graph::new(3, &[(1, 2), (2, 1), (2, 3)]),
            Err(Error::DuplicateEdge(1, 2))
        );
        assert_eq!(
            Graph::new(4, &[(1, 2), (3, 4)]),
            Err(Error::DisconnectedGraph(3))
        );
        assert_eq!(
            Graph::new(2, &[(1, 3)]),
            Err(Error::NodeOutOfRange(1, 3, 2))
        );
    }

    #[test]
    fn build_normalizes_orientation() {
        let g = Graph::new(3, &[(3, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(1, 2), (2, 3)]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_tree());
        assert_eq!(triangle().edge_count(), 3);
    }

    #[test]
    fn degrees_of_fixtures() {
        assert_eq!(six_node_tree().degrees(), vec![1, 2, 4, 1, 1, 1]);
        assert_eq!(Graph::new(2, &[(1, 2)]).unwrap().degrees(), vec![1, 1]);
        assert_eq!(triangle().degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn reconstructed_tree_matches_both_degree_sums() {
        // assignment (1) and (2) of the six-node example
        let deg = six_node_tree().degrees();
        let a1 = [0.1, 0.2, 0.4, 0.1, 0.1, 0.1];
        let a2 = [0.1, 0.2, 0.1, 0.1, 0.1, 0.4];
        let s1: f64 = deg.iter().zip(a1).map(|(&d, e)| d as f64 / e).sum();
        let s2: f64 = deg.iter().zip(a2).map(|(&d, e)| d as f64 / e).sum();
        assert!((s1 - 60.0).abs() < 1e-12);
        assert!((s2 - 82.5).abs() < 1e-12);
    }

    #[test]
    fn bfs_tree_on_triangle() {
        let ord = spanning_tree(&triangle());
        assert_eq!(ord.tree_edges(), &[(1, 2), (1, 3)]);
        assert_eq!(ord.cycle_edges(), &[(2, 3)]);
        assert_eq!(ord.index_of((3, 2)), Some(2));
    }

    #[test]
    fn bfs_tree_on_trees_and_paths() {
        let path = Graph::new(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(spanning_tree(&path).tree_edges(), &[(1, 2), (2, 3)]);
        let ord = spanning_tree(&six_node_tree());
        assert_eq!(ord.tree_count(), 5);
        assert!(ord.cycle_edges().is_empty());
    }

    #[test]
    fn explicit_trees() {
        let g = triangle();
        let a = spanning_tree_from(&g, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(a.cycle_edges(), &[(1, 3)]);
        let b = spanning_tree_from(&g, &[(1, 2), (1, 3)]).unwrap();
        assert_eq!(b.cycle_edges(), &[(2, 3)]);
        assert!(matches!(
            spanning_tree_from(&g, &[(1, 2)]),
            Err(Error::NotASpanningTree(_))
        ));
        let square = Graph::new(4, &[(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)]).unwrap();
        assert!(matches!(
            spanning_tree_from(&square, &[(1, 2), (2, 3), (1, 3)]),
            Err(Error::NotASpanningTree(_))
        ));
        assert!(matches!(
            spanning_tree_from(&square, &[(1, 2), (2, 3), (2, 4)]),
            Err(Error::NotASpanningTree(_))
        ));
    }

    #[test]
    fn incidence_columns() {
        let path = Graph::new(2, &[(1, 2)]).unwrap();
        let inc = incidence(&path, &spanning_tree(&path));
        assert_eq!(inc.d, DMatrix::from_row_slice(2, 1, &[1.0, -1.0]));

        let g = triangle();
        let inc = incidence(&g, &spanning_tree(&g));
        assert_eq!(
            inc.d_tree,
            DMatrix::from_row_slice(3, 2, &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0])
        );
        assert_eq!(inc.d_cycle, DMatrix::from_row_slice(3, 1, &[0.0, 1.0, -1.0]));
        assert!(inc.d.row_sum().amax() == 0.0);
    }

    #[test]
    fn cut_basis_of_triangle_and_tree() {
        let g = triangle();
        let inc = incidence(&g, &spanning_tree(&g));
        let cb = cut_basis(&inc).unwrap();
        assert!((cb.t_tree_cycle[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((cb.t_tree_cycle[(1, 0)] - 1.0).abs() < 1e-12);
        assert!((&inc.d_tree * &cb.r - &inc.d).amax() < 1e-10);

        let t = six_node_tree();
        let cb = cut_basis(&incidence(&t, &spanning_tree(&t))).unwrap();
        assert_eq!(cb.r, DMatrix::identity(5, 5));
    }

    #[test]
    fn cut_basis_rejects_non_tree_columns() {
        // columns (1,2),(2,3),(1,3) form a cycle, so the Gram is singular
        let d_tree = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.0, 1.0, -1.0, 1.0, 0.0, 0.0, -1.0, -1.0],
        );
        let inc = IncidenceDecomposition {
            d: d_tree.clone(),
            d_tree,
            d_cycle: DMatrix::zeros(3, 0),
        };
        assert_eq!(cut_basis(&inc), Err(Error::SingularTreeGram));
    }

    #[test]
    fn spanning_tree_is_deterministic() {
        let g = Graph::new(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (2, 4)]).unwrap();
        assert_eq!(spanning_tree(&g), spanning_tree(&g));
    }

    #[test]
    fn kappa_reordering() {
        let net = Network::new(triangle()).unwrap();
        // graph order (1,2),(1,3),(2,3) matches κ order here
        let w = net.to_kappa_order(&[1.0, 2.0, 3.0]);
        assert_eq!(w.as_slice(), &[1.0, 2.0, 3.0]);
        let net = Network::with_tree(triangle(), &[(2, 3), (1, 3)]).unwrap();
        let w = net.to_kappa_order(&[1.0, 2.0, 3.0]);
        assert_eq!(w.as_slice(), &[3.0, 2.0, 1.0]);
    }
}
