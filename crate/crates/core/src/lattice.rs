//! The rotated square lattice, its dual, finite domains and boundary
//! bookkeeping.
//!
//! The primal lattice has vertex set `{(x, y) : x + y even}` with edges
//! between `(x, y)` and `(x ± 1, y ± 1)`; the dual lattice is the primal one
//! shifted by `(1, 0)`.  A *domain* is the subgraph induced by the vertices
//! on and inside a simple cycle; the cycle itself is the domain-boundary.
//! Every derived set (generic boundary, dual graph, edge indices) is computed
//! eagerly at construction time and never mutated afterwards, so domains can
//! be shared freely across threads.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Diagonal steps of the rotated lattice.
pub const DIAG_STEPS: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
/// Unit steps of the ambient integer lattice.
pub const UNIT_STEPS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Which of the two interleaved sublattices a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// `x + y` even.
    Primal,
    /// `x + y` odd (the primal lattice shifted by `(1, 0)`).
    Dual,
}

/// A point of the ambient integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn parity(&self) -> Parity {
        if (self.x + self.y).rem_euclid(2) == 0 {
            Parity::Primal
        } else {
            Parity::Dual
        }
    }

    /// The four neighbours within the point's own (rotated) sublattice.
    pub fn diag_neighbors(&self) -> [LatticePoint; 4] {
        DIAG_STEPS.map(|(dx, dy)| LatticePoint::new(self.x + dx, self.y + dy))
    }

    /// The four neighbours in the ambient integer lattice.
    pub fn unit_neighbors(&self) -> [LatticePoint; 4] {
        UNIT_STEPS.map(|(dx, dy)| LatticePoint::new(self.x + dx, self.y + dy))
    }

    pub fn l1_norm(&self) -> i64 {
        self.x.abs() + self.y.abs()
    }
}

pub const ORIGIN: LatticePoint = LatticePoint::new(0, 0);

/// How a domain was constructed; cycle data is only available for the first
/// two kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Box,
    CycleDomain,
    Subgraph,
}

/// A finite induced subgraph of the rotated lattice (or of its dual), with
/// dense deterministic edge indices and precomputed boundary sets.
#[derive(Clone, Debug)]
pub struct Domain {
    lattice: Parity,
    kind: DomainKind,
    vertices: Vec<LatticePoint>,
    vindex: HashMap<LatticePoint, usize>,
    /// Edges as `(a, b)` with `a < b`; sorted, so index order is lexicographic
    /// in the endpoint coordinates.
    edges: Vec<(u32, u32)>,
    /// Per vertex: `(edge index, other endpoint)` pairs.
    incident: Vec<Vec<(u32, u32)>>,
    /// Vertices adjacent (within the full lattice) to the complement.
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    /// Vertices on the surrounding cycle, in cyclic order.
    cycle: Option<Vec<usize>>,
    domain_boundary: Option<Vec<usize>>,
    is_domain_boundary: Vec<bool>,
    /// Edge indices of the cycle edges.
    edge_boundary: Option<Vec<usize>>,
    is_edge_boundary: Vec<bool>,
}

impl Domain {
    /// Builds the box of all lattice vertices with l1 norm at most `2n`.
    ///
    /// For `n >= 1` the box is a cycle-domain whose surrounding cycle is the
    /// l1 sphere of radius `2n`; `n = 0` degenerates to the single origin
    /// vertex.
    pub fn lambda(n: u32) -> Domain {
        if n == 0 {
            return Self::assemble(
                Parity::Primal,
                DomainKind::Box,
                vec![ORIGIN],
                None,
            )
            .expect("single-vertex box is always valid");
        }
        let r = 2 * i64::from(n);
        let mut vs = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                let p = LatticePoint::new(x, y);
                if p.parity() == Parity::Primal && p.l1_norm() <= r {
                    vs.push(p);
                }
            }
        }
        // Walk the l1 sphere as a cycle, one quadrant at a time.
        let mut cycle = Vec::with_capacity(8 * n as usize);
        let mut p = LatticePoint::new(r, 0);
        for step in [(-1, 1), (-1, -1), (1, -1), (1, 1)] {
            for _ in 0..r {
                cycle.push(p);
                p = LatticePoint::new(p.x + step.0, p.y + step.1);
            }
        }
        Self::assemble(Parity::Primal, DomainKind::Box, vs, Some(cycle))
            .expect("box construction is always valid")
    }

    /// Builds the domain enclosed by a simple cycle (vertices on the cycle
    /// plus all same-sublattice vertices strictly inside it).
    pub fn from_cycle(cycle: &[LatticePoint]) -> Result<Domain> {
        if cycle.len() < 4 {
            return Err(Error::InvalidDomain(format!(
                "cycle needs at least 4 vertices, got {}",
                cycle.len()
            )));
        }
        let lattice = cycle[0].parity();
        for p in cycle {
            if p.parity() != lattice {
                return Err(Error::InvalidDomain(format!(
                    "cycle mixes sublattices at {p:?}"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for p in cycle {
            if !seen.insert(*p) {
                return Err(Error::InvalidDomain(format!(
                    "cycle revisits {p:?}"
                )));
            }
        }
        for i in 0..cycle.len() {
            let a = cycle[i];
            let b = cycle[(i + 1) % cycle.len()];
            if (a.x - b.x).abs() != 1 || (a.y - b.y).abs() != 1 {
                return Err(Error::InvalidDomain(format!(
                    "cycle step {a:?} -> {b:?} is not a lattice edge"
                )));
            }
        }

        let min_x = cycle.iter().map(|p| p.x).min().unwrap();
        let max_x = cycle.iter().map(|p| p.x).max().unwrap();
        let min_y = cycle.iter().map(|p| p.y).min().unwrap();
        let max_y = cycle.iter().map(|p| p.y).max().unwrap();
        let mut vs: Vec<LatticePoint> = cycle.to_vec();
        for x in min_x..=max_x {
            for y in min_y..=max_y {
                let p = LatticePoint::new(x, y);
                if p.parity() == lattice && !seen.contains(&p) && point_in_polygon(p, cycle) {
                    vs.push(p);
                }
            }
        }
        Self::assemble(lattice, DomainKind::CycleDomain, vs, Some(cycle.to_vec()))
    }

    /// Builds the induced subgraph on an explicit vertex set (no cycle data).
    pub fn from_vertices(vertices: &[LatticePoint]) -> Result<Domain> {
        if vertices.is_empty() {
            return Err(Error::InvalidDomain("empty vertex set".into()));
        }
        let lattice = vertices[0].parity();
        for p in vertices {
            if p.parity() != lattice {
                return Err(Error::InvalidDomain(format!(
                    "vertex set mixes sublattices at {p:?}"
                )));
            }
        }
        Self::assemble(lattice, DomainKind::Subgraph, vertices.to_vec(), None)
    }

    /// The standard 4-cycle through `(0,0), (1,1), (2,0), (1,-1)` — the
    /// smallest domain, used all over the test-suite.
    pub fn diamond() -> Domain {
        Domain::from_cycle(&[
            LatticePoint::new(0, 0),
            LatticePoint::new(1, 1),
            LatticePoint::new(2, 0),
            LatticePoint::new(1, -1),
        ])
        .expect("diamond cycle is valid")
    }

    fn assemble(
        lattice: Parity,
        kind: DomainKind,
        mut vertices: Vec<LatticePoint>,
        cycle_points: Option<Vec<LatticePoint>>,
    ) -> Result<Domain> {
        vertices.sort();
        vertices.dedup();
        let vindex: HashMap<LatticePoint, usize> =
            vertices.iter().enumerate().map(|(i, p)| (*p, i)).collect();

        let mut edges = Vec::new();
        for (i, p) in vertices.iter().enumerate() {
            // Generate each edge once via the two "rightward" steps.
            for step in [(1, 1), (1, -1)] {
                let q = LatticePoint::new(p.x + step.0, p.y + step.1);
                if let Some(&j) = vindex.get(&q) {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    edges.push((a as u32, b as u32));
                }
            }
        }
        edges.sort();
        edges.dedup();

        let mut incident = vec![Vec::new(); vertices.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            incident[a as usize].push((e as u32, b));
            incident[b as usize].push((e as u32, a));
        }

        let mut boundary = Vec::new();
        let mut is_boundary = vec![false; vertices.len()];
        for (i, p) in vertices.iter().enumerate() {
            if p.diag_neighbors().iter().any(|q| !vindex.contains_key(q)) {
                boundary.push(i);
                is_boundary[i] = true;
            }
        }

        let mut is_domain_boundary = vec![false; vertices.len()];
        let mut is_edge_boundary = vec![false; edges.len()];
        let (cycle, domain_boundary, edge_boundary) = match cycle_points {
            Some(cp) => {
                let cyc: Vec<usize> = cp.iter().map(|p| vindex[p]).collect();
                let mut db = cyc.clone();
                db.sort_unstable();
                for &v in &db {
                    is_domain_boundary[v] = true;
                }
                let mut eb = Vec::with_capacity(cyc.len());
                for i in 0..cyc.len() {
                    let a = cyc[i] as u32;
                    let b = cyc[(i + 1) % cyc.len()] as u32;
                    let key = if a < b { (a, b) } else { (b, a) };
                    let e = edges
                        .binary_search(&key)
                        .map_err(|_| Error::InvalidDomain("cycle edge missing".into()))?;
                    eb.push(e);
                    is_edge_boundary[e] = true;
                }
                eb.sort_unstable();
                (Some(cyc), Some(db), Some(eb))
            }
            None => (None, None, None),
        };

        Ok(Domain {
            lattice,
            kind,
            vertices,
            vindex,
            edges,
            incident,
            boundary,
            is_boundary,
            cycle,
            domain_boundary,
            is_domain_boundary,
            edge_boundary,
            is_edge_boundary,
        })
    }

    pub fn lattice(&self) -> Parity {
        self.lattice
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> LatticePoint {
        self.vertices[i]
    }

    pub fn vertex_index(&self, p: LatticePoint) -> Option<usize> {
        self.vindex.get(&p).copied()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (a, b) = self.edges[e];
        (a as usize, b as usize)
    }

    pub fn edge_points(&self, e: usize) -> (LatticePoint, LatticePoint) {
        let (a, b) = self.edge(e);
        (self.vertices[a], self.vertices[b])
    }

    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.incident[v]
    }

    /// Vertices adjacent to the complement of the domain.
    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// Vertices on the surrounding cycle (cycle-domains and boxes only).
    pub fn domain_boundary_indices(&self) -> Option<&[usize]> {
        self.domain_boundary.as_deref()
    }

    /// The surrounding cycle in cyclic order.
    pub fn cycle_indices(&self) -> Option<&[usize]> {
        self.cycle.as_deref()
    }

    /// Indices of the cycle edges.
    pub fn edge_boundary_indices(&self) -> Option<&[usize]> {
        self.edge_boundary.as_deref()
    }

    pub fn is_domain_boundary(&self, v: usize) -> bool {
        self.is_domain_boundary[v]
    }

    pub fn is_edge_boundary(&self, e: usize) -> bool {
        self.is_edge_boundary[e]
    }

    /// The dual graph: one dual edge crossing each edge of the domain,
    /// re-indexed lexicographically, plus the primal-to-dual edge bijection.
    pub fn dual(&self) -> DualGraph {
        let mut dual_vertices = Vec::with_capacity(2 * self.edges.len());
        let mut crossings = Vec::with_capacity(self.edges.len());
        for e in 0..self.edges.len() {
            let (p, q) = self.edge_points(e);
            let dx = q.x - p.x;
            let dy = q.y - p.y;
            let a = LatticePoint::new(p.x + dx, p.y);
            let b = LatticePoint::new(p.x, p.y + dy);
            dual_vertices.push(a);
            dual_vertices.push(b);
            crossings.push((a, b));
        }
        dual_vertices.sort();
        dual_vertices.dedup();
        let domain = Self::assemble(
            match self.lattice {
                Parity::Primal => Parity::Dual,
                Parity::Dual => Parity::Primal,
            },
            DomainKind::Subgraph,
            dual_vertices,
            None,
        )
        .expect("dual vertex set is valid");
        let edge_map = crossings
            .iter()
            .map(|&(a, b)| {
                let ia = domain.vindex[&a] as u32;
                let ib = domain.vindex[&b] as u32;
                let key = if ia < ib { (ia, ib) } else { (ib, ia) };
                domain
                    .edges
                    .binary_search(&key)
                    .expect("dual edge exists by construction")
            })
            .collect();
        DualGraph { domain, edge_map }
    }

    /// Line-oriented text form (vertex list then edge list), used for golden
    /// tests.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let lat = match self.lattice {
            Parity::Primal => "primal",
            Parity::Dual => "dual",
        };
        let kind = match self.kind {
            DomainKind::Box => "box",
            DomainKind::CycleDomain => "cycle-domain",
            DomainKind::Subgraph => "subgraph",
        };
        writeln!(s, "domain {} {} {} {}", kind, lat, self.n_vertices(), self.n_edges()).unwrap();
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(s, "v {} {} {}", i, p.x, p.y).unwrap();
        }
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let (p, q) = (self.vertices[a as usize], self.vertices[b as usize]);
            writeln!(s, "e {} {} {} {} {}", e, p.x, p.y, q.x, q.y).unwrap();
        }
        s
    }
}

/// A domain's dual graph together with the edge bijection `e -> e*`.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub domain: Domain,
    /// `edge_map[e]` is the index (in `domain`) of the edge dual to `e`.
    pub edge_map: Vec<usize>,
}

/// Exact even-odd ray casting; `p` must not lie on the cycle.
fn point_in_polygon(p: LatticePoint, cycle: &[LatticePoint]) -> bool {
    let mut crossings = 0u32;
    for i in 0..cycle.len() {
        let a = cycle[i];
        let b = cycle[(i + 1) % cycle.len()];
        if (a.y > p.y) != (b.y > p.y) {
            // Cycle steps have |dy| = 1, so the crossing abscissa is integer.
            let x = if a.y == p.y { a.x } else { b.x };
            if x > p.x {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

/// A partition of a boundary vertex set; cluster counting identifies the
/// vertices within each block.
#[derive(Clone, Debug)]
pub struct BoundaryPartition {
    support: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl BoundaryPartition {
    /// All singletons.
    pub fn free(support: &[usize]) -> Self {
        let mut support = support.to_vec();
        support.sort_unstable();
        let blocks = support.iter().map(|&v| vec![v]).collect();
        Self { support, blocks }
    }

    /// One block containing the whole support.
    pub fn wired(support: &[usize]) -> Self {
        let mut support = support.to_vec();
        support.sort_unstable();
        let blocks = if support.is_empty() { Vec::new() } else { vec![support.clone()] };
        Self { support, blocks }
    }

    pub fn custom(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut support: Vec<usize> = blocks.iter().flatten().copied().collect();
        let n = support.len();
        support.sort_unstable();
        support.dedup();
        if support.len() != n {
            return Err(Error::InvalidDomain(
                "boundary partition blocks overlap".into(),
            ));
        }
        Ok(Self { support, blocks })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Free partition on the generic boundary of `d`.
    pub fn free_boundary(d: &Domain) -> Self {
        Self::free(d.boundary_indices())
    }

    /// Wired partition on the generic boundary of `d`.
    pub fn wired_boundary(d: &Domain) -> Self {
        Self::wired(d.boundary_indices())
    }

    /// Wired partition on the domain-boundary (surrounding cycle) of `d`.
    pub fn wired_domain_boundary(d: &Domain) -> Result<Self> {
        let db = d
            .domain_boundary_indices()
            .ok_or_else(|| Error::InvalidDomain("domain has no surrounding cycle".into()))?;
        Ok(Self::wired(db))
    }

    /// Is every pair inside a common block also identified by `other`?
    /// (Partial order on partitions: coarser means larger.)
    pub fn refines(&self, coarser: &BoundaryPartition, n_vertices: usize) -> bool {
        let my = self.block_ids(n_vertices);
        let their = coarser.block_ids(n_vertices);
        for block in &self.blocks {
            for w in block.windows(2) {
                let _ = my;
                if their[w[0]].is_none() || their[w[0]] != their[w[1]] {
                    return false;
                }
            }
        }
        true
    }

    /// Per-vertex block id (None outside the support).
    pub fn block_ids(&self, n_vertices: usize) -> Vec<Option<u32>> {
        let mut ids = vec![None; n_vertices];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                ids[v] = Some(b as u32);
            }
        }
        ids
    }
}

/// Bit-vector percolation configuration over a domain's edge set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeConfig {
    words: Vec<u64>,
    n: usize,
}

impl EdgeConfig {
    pub fn empty(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)], n }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        for e in 0..n {
            c.set(e, true);
        }
        c
    }

    pub fn from_open_edges(n: usize, open: &[usize]) -> Self {
        let mut c = Self::empty(n);
        for &e in open {
            c.set(e, true);
        }
        c
    }

    /// Low `n` bits of `bits` as a configuration (enumeration helper).
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64);
        Self { words: vec![bits & mask64(n)], n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, e: usize) -> bool {
        debug_assert!(e < self.n);
        (self.words[e / 64] >> (e % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, e: usize, open: bool) {
        debug_assert!(e < self.n);
        let w = &mut self.words[e / 64];
        if open {
            *w |= 1 << (e % 64);
        } else {
            *w &= !(1 << (e % 64));
        }
    }

    pub fn count_open(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn open_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&e| self.get(e))
    }

    /// Is `self` contained in `other` edgewise?
    pub fn subset_of(&self, other: &EdgeConfig) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// The dual configuration: dual edge `map[e]` is open iff `e` is closed.
    pub fn dual_config(&self, map: &[usize], n_dual: usize) -> EdgeConfig {
        let mut out = EdgeConfig::empty(n_dual);
        for e in 0..self.n {
            out.set(map[e], !self.get(e));
        }
        out
    }

    /// Canonical 0/1 string in edge-index order.
    pub fn to_bit_string(&self) -> String {
        (0..self.n).map(|e| if self.get(e) { '1' } else { '0' }).collect()
    }
}

fn mask64(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Plain union-find over `u32` indices, path-halving + union by size.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: u32,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n as u32,
        }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.components = self.parent.len() as u32;
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.components -= 1;
        true
    }

    pub fn same(&mut self, a: u32, b: u32) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn components(&self) -> u32 {
        self.components
    }
}

/// Number of clusters of `cfg` on `d`, with the blocks of `bp` identified.
pub fn count_clusters(cfg: &EdgeConfig, bp: &BoundaryPartition, d: &Domain) -> usize {
    assert_eq!(cfg.len(), d.n_edges(), "configuration does not fit the domain");
    let mut uf = UnionFind::new(d.n_vertices());
    for block in bp.blocks() {
        for w in block.windows(2) {
            uf.union(w[0] as u32, w[1] as u32);
        }
    }
    for e in 0..d.n_edges() {
        if cfg.get(e) {
            let (a, b) = d.edge(e);
            uf.union(a as u32, b as u32);
        }
    }
    uf.components() as usize
}

/// Raw connected components of `cfg` (free boundary), returning per-vertex
/// labels `0..k` in order of first appearance and the component count.
pub fn components(cfg: &EdgeConfig, d: &Domain) -> (Vec<u32>, usize) {
    let mut uf = UnionFind::new(d.n_vertices());
    for e in 0..d.n_edges() {
        if cfg.get(e) {
            let (a, b) = d.edge(e);
            uf.union(a as u32, b as u32);
        }
    }
    let mut label = vec![u32::MAX; d.n_vertices()];
    let mut next = 0u32;
    for v in 0..d.n_vertices() {
        let r = uf.find(v as u32) as usize;
        if label[r] == u32::MAX {
            label[r] = next;
            next += 1;
        }
        if r != v {
            label[v] = label[r];
        }
    }
    (label, next as usize)
}

/// Are `u` and `v` joined by open edges, skipping `skip_edge` and teleporting
/// through the blocks of `bp`?  This is the connectivity query behind the
/// single-edge Gibbs samplers.
pub fn connected_without_edge(
    d: &Domain,
    open: impl Fn(usize) -> bool,
    bp: &BoundaryPartition,
    u: usize,
    v: usize,
    skip_edge: usize,
) -> bool {
    if u == v {
        return true;
    }
    let block_ids = bp.block_ids(d.n_vertices());
    let mut visited = vec![false; d.n_vertices()];
    let mut block_done = vec![false; bp.blocks().len()];
    let mut queue = std::collections::VecDeque::new();
    visited[u] = true;
    queue.push_back(u as u32);
    while let Some(w) = queue.pop_front() {
        let w = w as usize;
        if w == v {
            return true;
        }
        if let Some(b) = block_ids[w] {
            if !block_done[b as usize] {
                block_done[b as usize] = true;
                for &m in &bp.blocks()[b as usize] {
                    if !visited[m] {
                        visited[m] = true;
                        queue.push_back(m as u32);
                    }
                }
            }
        }
        for &(e, other) in d.incident(w) {
            let e = e as usize;
            if e == skip_edge || !open(e) {
                continue;
            }
            let o = other as usize;
            if !visited[o] {
                visited[o] = true;
                queue.push_back(o as u32);
            }
        }
    }
    false
}

/// Is `source` joined to any vertex of `targets` by open edges (no block
/// identifications; the event is about literal open paths)?
pub fn connected_to_set(
    d: &Domain,
    cfg: &EdgeConfig,
    source: usize,
    targets: &[usize],
) -> bool {
    let mut is_target = vec![false; d.n_vertices()];
    for &t in targets {
        is_target[t] = true;
    }
    if is_target[source] {
        return true;
    }
    let mut visited = vec![false; d.n_vertices()];
    let mut queue = std::collections::VecDeque::new();
    visited[source] = true;
    queue.push_back(source as u32);
    while let Some(w) = queue.pop_front() {
        for &(e, other) in d.incident(w as usize) {
            if !cfg.get(e as usize) {
                continue;
            }
            let o = other as usize;
            if !visited[o] {
                if is_target[o] {
                    return true;
                }
                visited[o] = true;
                queue.push_back(o as u32);
            }
        }
    }
    false
}

/// Even or odd integer-lattice domain assembled from a rotated-lattice
/// domain and its dual graph.
#[derive(Clone, Debug)]
pub struct Z2Domain {
    primal: Domain,
    dual: Domain,
    dual_edge_map: Vec<usize>,
    parity: Parity,
    vertices: Vec<LatticePoint>,
    vindex: HashMap<LatticePoint, usize>,
    z2_edges: Vec<(u32, u32)>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    /// Per vertex of the combined graph: index into `primal` or `dual`.
    primal_of: Vec<Option<u32>>,
    dual_of: Vec<Option<u32>>,
    edge_quads: Vec<EdgeQuad>,
}

/// Combined-graph indices of a primal edge's endpoints and of its dual
/// edge's endpoints, plus whether the edge lies on the surrounding cycle.
#[derive(Clone, Copy, Debug)]
pub struct EdgeQuad {
    pub u: u32,
    pub v: u32,
    pub dual_u: u32,
    pub dual_v: u32,
    pub on_cycle: bool,
}

/// Builds the integer-lattice domain spanned by a cycle-domain and its dual:
/// even when the input lives on the primal sublattice, odd otherwise.  The
/// boundary is the surrounding cycle of the input together with the generic
/// boundary of the dual graph.
pub fn even_domain(d: &Domain) -> Result<Z2Domain> {
    if d.domain_boundary_indices().is_none() {
        return Err(Error::InvalidDomain(
            "integer-lattice domains require a cycle-domain".into(),
        ));
    }
    if d.n_edges() == 0 {
        return Err(Error::InvalidDomain("degenerate domain without edges".into()));
    }
    let DualGraph { domain: dual, edge_map } = d.dual();
    let mut vertices: Vec<LatticePoint> = d
        .vertices()
        .iter()
        .chain(dual.vertices().iter())
        .copied()
        .collect();
    vertices.sort();
    vertices.dedup();
    if vertices.len() != d.n_vertices() + dual.n_vertices() {
        return Err(Error::InvalidDomain(
            "primal and dual vertex sets overlap".into(),
        ));
    }
    let vindex: HashMap<LatticePoint, usize> =
        vertices.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    let mut z2_edges = Vec::new();
    for (i, p) in vertices.iter().enumerate() {
        for step in [(1, 0), (0, 1)] {
            let q = LatticePoint::new(p.x + step.0, p.y + step.1);
            if let Some(&j) = vindex.get(&q) {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                z2_edges.push((a as u32, b as u32));
            }
        }
    }
    z2_edges.sort();

    let mut primal_of = vec![None; vertices.len()];
    let mut dual_of = vec![None; vertices.len()];
    for (i, p) in d.vertices().iter().enumerate() {
        primal_of[vindex[p]] = Some(i as u32);
    }
    for (i, p) in dual.vertices().iter().enumerate() {
        dual_of[vindex[p]] = Some(i as u32);
    }

    let mut boundary = Vec::new();
    let mut is_boundary = vec![false; vertices.len()];
    for &v in d.domain_boundary_indices().unwrap() {
        let i = vindex[&d.vertex(v)];
        boundary.push(i);
        is_boundary[i] = true;
    }
    for &v in dual.boundary_indices() {
        let i = vindex[&dual.vertex(v)];
        boundary.push(i);
        is_boundary[i] = true;
    }
    boundary.sort_unstable();
    boundary.dedup();

    let edge_quads = (0..d.n_edges())
        .map(|e| {
            let (p, q) = d.edge_points(e);
            let (dp, dq) = dual.edge_points(edge_map[e]);
            EdgeQuad {
                u: vindex[&p] as u32,
                v: vindex[&q] as u32,
                dual_u: vindex[&dp] as u32,
                dual_v: vindex[&dq] as u32,
                on_cycle: d.is_edge_boundary(e),
            }
        })
        .collect();

    let parity = d.lattice();
    Ok(Z2Domain {
        primal: d.clone(),
        dual,
        dual_edge_map: edge_map,
        parity,
        vertices,
        vindex,
        z2_edges,
        boundary,
        is_boundary,
        primal_of,
        dual_of,
        edge_quads,
    })
}

impl Z2Domain {
    /// The rotated-lattice domain this was built from.
    pub fn base(&self) -> &Domain {
        &self.primal
    }

    pub fn dual_graph(&self) -> &Domain {
        &self.dual
    }

    pub fn dual_edge_map(&self) -> &[usize] {
        &self.dual_edge_map
    }

    /// `Parity::Primal` marks an even domain, `Parity::Dual` an odd one.
    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> LatticePoint {
        self.vertices[i]
    }

    pub fn vertex_index(&self, p: LatticePoint) -> Option<usize> {
        self.vindex.get(&p).copied()
    }

    pub fn z2_edges(&self) -> &[(u32, u32)] {
        &self.z2_edges
    }

    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    /// Is combined vertex `v` on the primal sublattice of the ambient
    /// integer lattice?
    pub fn on_primal_sublattice(&self, v: usize) -> bool {
        self.vertices[v].parity() == Parity::Primal
    }

    /// Index into the base domain, if `v` belongs to it.
    pub fn base_index(&self, v: usize) -> Option<usize> {
        self.primal_of[v].map(|i| i as usize)
    }

    pub fn dual_index(&self, v: usize) -> Option<usize> {
        self.dual_of[v].map(|i| i as usize)
    }

    /// Combined index of base-domain vertex `i`.
    pub fn from_base_index(&self, i: usize) -> usize {
        self.vindex[&self.primal.vertex(i)]
    }

    pub fn from_dual_index(&self, i: usize) -> usize {
        self.vindex[&self.dual.vertex(i)]
    }

    pub fn edge_quads(&self) -> &[EdgeQuad] {
        &self.edge_quads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda_0_is_single_vertex() {
        let d = Domain::lambda(0);
        assert_eq!(d.n_vertices(), 1);
        assert_eq!(d.n_edges(), 0);
        assert_eq!(d.boundary_indices(), &[0]);
    }

    #[test]
    fn lambda_1_counts() {
        // 9 vertices and 12 edges, checked by hand against the l1 ball of
        // radius 2 with diagonal adjacency.
        let d = Domain::lambda(1);
        assert_eq!(d.n_vertices(), 9);
        assert_eq!(d.n_edges(), 12);
        assert_eq!(d.boundary_indices().len(), 8);
        assert_eq!(d.domain_boundary_indices().unwrap().len(), 8);
        assert_eq!(d.edge_boundary_indices().unwrap().len(), 8);
    }

    /// Brute-force adjacency scan, independent of Domain's edge builder.
    fn flood_fill_edge_count(vs: &[LatticePoint]) -> usize {
        let set: std::collections::HashSet<_> = vs.iter().copied().collect();
        let mut count = 0;
        for p in vs {
            for q in p.diag_neighbors() {
                if set.contains(&q) {
                    count += 1;
                }
            }
        }
        count / 2
    }

    #[test]
    fn lambda_2_matches_flood_fill() {
        let d = Domain::lambda(2);
        assert_eq!(d.n_vertices(), 25);
        assert_eq!(d.n_edges(), flood_fill_edge_count(d.vertices()));
    }

    #[test]
    fn diamond_shape() {
        let d = Domain::diamond();
        assert_eq!(d.n_vertices(), 4);
        assert_eq!(d.n_edges(), 4);
        assert!(d.domain_boundary_indices().unwrap().len() == 4);
    }

    #[test]
    fn single_edge_dual() {
        let d = Domain::from_vertices(&[LatticePoint::new(0, 0), LatticePoint::new(1, 1)]).unwrap();
        assert_eq!(d.n_edges(), 1);
        let dual = d.dual();
        assert_eq!(dual.domain.n_edges(), 1);
        let (a, b) = dual.domain.edge_points(dual.edge_map[0]);
        assert_eq!((a, b), (LatticePoint::new(0, 1), LatticePoint::new(1, 0)));
    }

    #[test]
    fn dual_edge_bijection_is_involution() {
        for d in [Domain::lambda(1), Domain::lambda(2), Domain::diamond()] {
            let dual = d.dual();
            assert_eq!(d.n_edges(), dual.domain.n_edges());
            let back = dual.domain.dual();
            for e in 0..d.n_edges() {
                let (p, q) = d.edge_points(e);
                let (bp, bq) = back.domain.edge_points(back.edge_map[dual.edge_map[e]]);
                assert_eq!((p, q), (bp, bq), "edge {e} not restored");
            }
        }
    }

    #[test]
    fn diamond_dual_is_star() {
        let d = Domain::diamond();
        let dual = d.dual();
        let center = dual.domain.vertex_index(LatticePoint::new(1, 0)).unwrap();
        for e in 0..dual.domain.n_edges() {
            let (a, b) = dual.domain.edge(e);
            assert!(a == center || b == center);
        }
        // The centre is the only non-boundary dual vertex.
        assert_eq!(dual.domain.boundary_indices().len(), 4);
        assert!(!dual.domain.is_boundary(center));
    }

    #[test]
    fn domain_boundary_contains_generic_boundary() {
        for d in [Domain::lambda(1), Domain::lambda(2), Domain::diamond()] {
            for &v in d.boundary_indices() {
                assert!(d.is_domain_boundary(v));
            }
            for &e in d.edge_boundary_indices().unwrap() {
                let (a, b) = d.edge(e);
                assert!(d.is_domain_boundary(a) && d.is_domain_boundary(b));
            }
        }
    }

    #[test]
    fn cluster_counts_on_lambda_1() {
        let d = Domain::lambda(1);
        let free = BoundaryPartition::free_boundary(&d);
        let wired = BoundaryPartition::wired_boundary(&d);
        let empty = EdgeConfig::empty(d.n_edges());
        let full = EdgeConfig::full(d.n_edges());
        assert_eq!(count_clusters(&empty, &free, &d), 9);
        assert_eq!(count_clusters(&empty, &wired, &d), 2);
        assert_eq!(count_clusters(&full, &free, &d), 1);
        assert_eq!(count_clusters(&full, &wired, &d), 1);
    }

    #[test]
    fn even_domain_of_diamond() {
        let z = even_domain(&Domain::diamond()).unwrap();
        assert_eq!(z.base().n_vertices(), 4);
        assert_eq!(z.dual_graph().n_vertices(), 5);
        assert_eq!(z.n_vertices(), 9);
        assert_eq!(z.parity(), Parity::Primal);
        // Boundary: the 4 cycle vertices plus the 4 dual leaves.
        assert_eq!(z.boundary_indices().len(), 8);
        let center = z.vertex_index(LatticePoint::new(1, 0)).unwrap();
        assert!(!z.is_boundary(center));
    }

    #[test]
    fn even_domain_of_lambda_1() {
        let z = even_domain(&Domain::lambda(1)).unwrap();
        assert_eq!(z.n_vertices(), 9 + 12);
        assert_eq!(z.boundary_indices().len(), 8 + 8);
    }

    #[test]
    fn odd_domain_parity_flag() {
        let cyc = [
            LatticePoint::new(1, 0),
            LatticePoint::new(2, 1),
            LatticePoint::new(3, 0),
            LatticePoint::new(2, -1),
        ];
        let d = Domain::from_cycle(&cyc).unwrap();
        assert_eq!(d.lattice(), Parity::Dual);
        let z = even_domain(&d).unwrap();
        assert_eq!(z.parity(), Parity::Dual);
        assert_eq!(z.n_vertices(), 9);
    }

    #[test]
    fn from_cycle_rejects_broken_cycles() {
        assert!(Domain::from_cycle(&[
            LatticePoint::new(0, 0),
            LatticePoint::new(1, 1),
            LatticePoint::new(2, 0),
        ])
        .is_err());
        assert!(Domain::from_cycle(&[
            LatticePoint::new(0, 0),
            LatticePoint::new(1, 1),
            LatticePoint::new(3, 1),
            LatticePoint::new(1, -1),
        ])
        .is_err());
    }

    #[test]
    fn deterministic_indexing() {
        let a = Domain::lambda(2);
        let b = Domain::lambda(2);
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn domain_text_golden() {
        let d = Domain::diamond();
        let expected = "\
domain cycle-domain primal 4 4
v 0 0 0
v 1 1 -1
v 2 1 1
v 3 2 0
e 0 0 0 1 -1
e 1 0 0 1 1
e 2 1 -1 2 0
e 3 1 1 2 0
";
        assert_eq!(d.to_text(), expected);
    }

    proptest! {
        #[test]
        fn opening_an_edge_never_increases_cluster_count(
            bits in 0u64..(1 << 12),
            extra in 0usize..12,
        ) {
            let d = Domain::lambda(1);
            let cfg = EdgeConfig::from_bits(12, bits);
            let mut opened = cfg.clone();
            opened.set(extra, true);
            for bp in [
                BoundaryPartition::free_boundary(&d),
                BoundaryPartition::wired_boundary(&d),
            ] {
                prop_assert!(
                    count_clusters(&opened, &bp, &d) <= count_clusters(&cfg, &bp, &d)
                );
            }
        }

        #[test]
        fn dual_config_double_complement(bits in 0u64..(1 << 12)) {
            let d = Domain::lambda(1);
            let dual = d.dual();
            let back = dual.domain.dual();
            let cfg = EdgeConfig::from_bits(12, bits);
            let dc = cfg.dual_config(&dual.edge_map, dual.domain.n_edges());
            // Identify back-dual edges with the original ones.
            let mut compose = vec![0usize; d.n_edges()];
            for e in 0..d.n_edges() {
                compose[e] = back.edge_map[dual.edge_map[e]];
            }
            let dd = dc.dual_config(&back.edge_map, back.domain.n_edges());
            for e in 0..d.n_edges() {
                prop_assert_eq!(cfg.get(e), dd.get(compose[e]));
            }
        }
    }
}
