//! Colored rooted trees with gluing and breaking, and the stratum posets of
//! associahedra and multiplihedra.
//!
//! Strata are planar trees. Associahedron strata use plain vertices written
//! `(..)`. Multiplihedron strata are painted trees: `(..)` unpainted, `[..]`
//! on the paint line, `{..}` painted; reading from the root every path to a
//! leaf passes painted vertices, exactly one frontier vertex, then unpainted
//! ones. Leaves are numbered `1..k` left to right.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Child {
    Leaf {
        color: u8,
    },
    /// Interior edge to vertex `v`; `color` is the exterior color the edge
    /// had before gluing, kept so that breaking inverts gluing.
    Vertex {
        v: usize,
        length: BigRational,
        color: u8,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredRootedTree {
    pub vertex_colors: Vec<u8>,
    pub children: Vec<Vec<Child>>,
    pub root_color: u8,
    /// `None` is the single doubly-infinite edge.
    pub root_vertex: Option<usize>,
}

impl ColoredRootedTree {
    pub fn corolla(color: u8, root_color: u8, leaf_colors: &[u8]) -> Self {
        ColoredRootedTree {
            vertex_colors: vec![color],
            children: vec![leaf_colors.iter().map(|&c| Child::Leaf { color: c }).collect()],
            root_color,
            root_vertex: Some(0),
        }
    }

    /// One color-1 vertex with a color-1 root and one color-1 leaf.
    pub fn strip() -> Self {
        Self::corolla(1, 1, &[1])
    }

    pub fn doubly_infinite() -> Self {
        ColoredRootedTree {
            vertex_colors: vec![],
            children: vec![],
            root_color: 0,
            root_vertex: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_colors.len();
        if self.children.len() != n {
            return Err(Error::MalformedTree("one child list per vertex".into()));
        }
        if self.root_color > 1 || self.vertex_colors.iter().any(|&c| c > 1) {
            return Err(Error::MalformedTree("colors are 0 or 1".into()));
        }
        let Some(r) = self.root_vertex else {
            if n != 0 || self.root_color != 0 {
                return Err(Error::MalformedTree(
                    "the doubly-infinite edge has no vertices and color 0".into(),
                ));
            }
            return Ok(());
        };
        if r >= n {
            return Err(Error::MalformedTree("root vertex out of range".into()));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::MalformedTree(format!("vertex {v} reached twice")));
            }
            if self.children[v].is_empty() {
                return Err(Error::MalformedTree(format!("vertex {v} has no outgoing edge")));
            }
            for c in &self.children[v] {
                match c {
                    Child::Leaf { color } if *color > 1 => {
                        return Err(Error::MalformedTree("colors are 0 or 1".into()))
                    }
                    Child::Leaf { .. } => {}
                    Child::Vertex { v: w, length, color } => {
                        if *w >= n || length.is_negative() || *color > 1 {
                            return Err(Error::MalformedTree(format!("bad edge {v} -> {w}")));
                        }
                        stack.push(*w);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::MalformedTree("unreachable vertex".into()));
        }
        Ok(())
    }

    /// Leaves in planar order as `(vertex, slot, color)`.
    pub fn leaves(&self) -> Vec<(usize, usize, u8)> {
        let mut out = Vec::new();
        if let Some(r) = self.root_vertex {
            self.collect_leaves(r, &mut out);
        }
        out
    }

    fn collect_leaves(&self, v: usize, out: &mut Vec<(usize, usize, u8)>) {
        for (slot, c) in self.children[v].iter().enumerate() {
            match c {
                Child::Leaf { color } => out.push((v, slot, *color)),
                Child::Vertex { v: w, .. } => self.collect_leaves(*w, out),
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self.root_vertex {
            None => 1,
            Some(_) => self.leaves().len(),
        }
    }

    pub fn leaf_color(&self, i: usize) -> Option<u8> {
        match self.root_vertex {
            None => (i == 0).then_some(self.root_color),
            Some(_) => self.leaves().get(i).map(|l| l.2),
        }
    }

    fn parents(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.vertex_colors.len()];
        for (v, cs) in self.children.iter().enumerate() {
            for c in cs {
                if let Child::Vertex { v: w, .. } = c {
                    p[*w] = Some(v);
                }
            }
        }
        p
    }

    /// Color-1 vertices with at most two incident edges.
    pub fn unstable_vertices(&self) -> Vec<usize> {
        (0..self.vertex_colors.len())
            .filter(|&v| self.vertex_colors[v] == 1 && self.children[v].len() < 2)
            .collect()
    }

    /// Renumber vertices in depth-first planar order.
    pub fn canonical(&self) -> ColoredRootedTree {
        let Some(r) = self.root_vertex else { return self.clone() };
        let mut order = Vec::new();
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            order.push(v);
            for c in self.children[v].iter().rev() {
                if let Child::Vertex { v: w, .. } = c {
                    stack.push(*w);
                }
            }
        }
        let mut new_index = vec![0; self.vertex_colors.len()];
        for (i, &v) in order.iter().enumerate() {
            new_index[v] = i;
        }
        ColoredRootedTree {
            vertex_colors: order.iter().map(|&v| self.vertex_colors[v]).collect(),
            children: order
                .iter()
                .map(|&v| {
                    self.children[v]
                        .iter()
                        .map(|c| match c {
                            Child::Leaf { color } => Child::Leaf { color: *color },
                            Child::Vertex { v: w, length, color } => Child::Vertex {
                                v: new_index[*w],
                                length: length.clone(),
                                color: *color,
                            },
                        })
                        .collect()
                })
                .collect(),
            root_color: self.root_color,
            root_vertex: Some(0),
        }
    }

    fn encode_vertex(&self, v: usize, out: &mut String) {
        out.push_str(&format!("{}(", self.vertex_colors[v]));
        for (i, c) in self.children[v].iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match c {
                Child::Leaf { color } => out.push_str(&format!("L{color}")),
                Child::Vertex { v: w, length, color } => {
                    out.push_str(&format!("{length}/{color}:"));
                    self.encode_vertex(*w, out);
                }
            }
        }
        out.push(')');
    }

    /// Canonical text form, e.g. `R1:1(L1)` for the strip.
    pub fn encode(&self) -> String {
        let mut s = format!("R{}:", self.root_color);
        match self.root_vertex {
            None => s.push_str("L0"),
            Some(r) => self.encode_vertex(r, &mut s),
        }
        s
    }
}

/// Coloring constraint plus a color-1 core containing the root vertex with
/// only color-0 vertices hanging off it. The all-color-0 tree (empty core)
/// is admissible.
pub fn is_admissible(t: &ColoredRootedTree) -> Result<bool> {
    t.validate()?;
    let Some(r) = t.root_vertex else { return Ok(true) };
    if t.root_color == 1 && t.vertex_colors[r] != 1 {
        return Ok(false);
    }
    for (v, _, color) in t.leaves() {
        if color == 1 && t.vertex_colors[v] != 1 {
            return Ok(false);
        }
    }
    let parents = t.parents();
    for (v, p) in parents.iter().enumerate() {
        if let (1, Some(p)) = (t.vertex_colors[v], p) {
            if t.vertex_colors[*p] != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub id: usize,
    pub child: usize,
    pub parent: usize,
    pub leaf: usize,
}

/// Trees `T_0, .., T_m` where the root of each `T_j` (`j >= 1`) meets a leaf
/// of an earlier component at infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenTree {
    pub components: Vec<ColoredRootedTree>,
    pub connections: Vec<Connection>,
}

impl BrokenTree {
    pub fn single(t: ColoredRootedTree) -> Self {
        BrokenTree {
            components: vec![t],
            connections: vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.components.len();
        for t in &self.components {
            t.validate()?;
        }
        let mut has_parent = vec![false; m];
        let mut used = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for c in &self.connections {
            if !ids.insert(c.id) {
                return Err(Error::BadConnection(format!("duplicate id {}", c.id)));
            }
            if c.child >= m || c.parent >= c.child {
                return Err(Error::BadConnection(format!(
                    "connection {} joins {} to {}",
                    c.id, c.child, c.parent
                )));
            }
            if std::mem::replace(&mut has_parent[c.child], true) {
                return Err(Error::BadConnection(format!("component {} has two roots", c.child)));
            }
            if c.leaf >= self.components[c.parent].leaf_count() || !used.insert((c.parent, c.leaf)) {
                return Err(Error::BadConnection(format!("leaf {} of {}", c.leaf, c.parent)));
            }
            if self.components[c.parent].root_vertex.is_none() {
                return Err(Error::BadConnection("cannot attach to a bare edge".into()));
            }
            let leaf = self.components[c.parent].leaf_color(c.leaf);
            if leaf != Some(self.components[c.child].root_color) {
                return Err(Error::ColorMismatch(c.id));
            }
        }
        if has_parent.iter().skip(1).any(|h| !h) {
            return Err(Error::BadConnection(
                "every component but the first needs a root connection".into(),
            ));
        }
        Ok(())
    }

    /// Components admissible, and no color-1 root hangs off a color-0 vertex.
    pub fn is_admissible_gluing(&self) -> Result<bool> {
        self.validate()?;
        for t in &self.components {
            if !is_admissible(t)? {
                return Ok(false);
            }
        }
        for c in &self.connections {
            let parent = &self.components[c.parent];
            let (v, _, _) = parent.leaves()[c.leaf];
            let child = &self.components[c.child];
            if let Some(r) = child.root_vertex {
                if parent.vertex_colors[v] == 0 && child.vertex_colors[r] == 1 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn glue_one(&mut self, id: usize, rho: &BigRational) -> Result<()> {
        if !rho.is_positive() {
            return Err(Error::BadConnection(format!("gluing length {rho} must be positive")));
        }
        let pos = self
            .connections
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::BadConnection(format!("no connection {id}")))?;
        let conn = self.connections.remove(pos);
        let child = self.components[conn.child].clone();
        let Some(child_root) = child.root_vertex else {
            return Err(Error::BadConnection("cannot glue a bare edge".into()));
        };
        let nc = child.leaf_count();
        let parent = &mut self.components[conn.parent];
        let (v, slot, _) = parent.leaves()[conn.leaf];
        let offset = parent.vertex_colors.len();
        parent.vertex_colors.extend(child.vertex_colors.iter().copied());
        for cs in &child.children {
            parent.children.push(
                cs.iter()
                    .map(|c| match c {
                        Child::Leaf { color } => Child::Leaf { color: *color },
                        Child::Vertex { v, length, color } => Child::Vertex {
                            v: v + offset,
                            length: length.clone(),
                            color: *color,
                        },
                    })
                    .collect(),
            );
        }
        parent.children[v][slot] = Child::Vertex {
            v: child_root + offset,
            length: rho.clone(),
            color: child.root_color,
        };
        *parent = parent.canonical();
        for c in &mut self.connections {
            if c.parent == conn.parent && c.leaf > conn.leaf {
                c.leaf += nc - 1;
            }
        }
        for c in &mut self.connections {
            if c.parent == conn.child {
                c.parent = conn.parent;
                c.leaf += conn.leaf;
            }
        }
        self.components.remove(conn.child);
        for c in &mut self.connections {
            if c.child > conn.child {
                c.child -= 1;
            }
            if c.parent > conn.child {
                c.parent -= 1;
            }
        }
        Ok(())
    }

    /// Glue the connections named in `rhos` with the given lengths.
    pub fn glue_partial(&self, rhos: &BTreeMap<usize, BigRational>) -> Result<BrokenTree> {
        self.validate()?;
        let mut out = self.clone();
        for (&id, rho) in rhos {
            out.glue_one(id, rho)?;
        }
        Ok(out)
    }

    /// Components with vertices renumbered canonically.
    pub fn canonical(&self) -> BrokenTree {
        BrokenTree {
            components: self.components.iter().map(|t| t.canonical()).collect(),
            connections: self.connections.clone(),
        }
    }
}

/// Glue every connection; `rhos[i]` is the length for the `i`-th connection
/// in id order.
pub fn glue(broken: &BrokenTree, rhos: &[BigRational]) -> Result<ColoredRootedTree> {
    let mut ids: Vec<usize> = broken.connections.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    if ids.len() != rhos.len() {
        return Err(Error::BadConnection(format!(
            "{} connections but {} lengths",
            ids.len(),
            rhos.len()
        )));
    }
    let map = ids.into_iter().zip(rhos.iter().cloned()).collect();
    let out = broken.glue_partial(&map)?;
    Ok(out.components.into_iter().next().expect("component 0 survives"))
}

/// Cut the interior edge into non-root vertex `v`; returns the broken tree
/// and the cut length.
pub fn break_edge(t: &ColoredRootedTree, v: usize) -> Result<(BrokenTree, BigRational)> {
    t.validate()?;
    let parents = t.parents();
    let Some(p) = parents.get(v).copied().flatten() else {
        return Err(Error::BadConnection(format!(
            "vertex {v} has no incoming interior edge"
        )));
    };
    let slot = t.children[p]
        .iter()
        .position(|c| matches!(c, Child::Vertex { v: w, .. } if *w == v))
        .expect("parent lists child");
    let Child::Vertex { length, color, .. } = t.children[p][slot].clone() else {
        unreachable!()
    };
    let mut below = t.clone();
    below.root_vertex = Some(v);
    below.root_color = color;
    let below = restrict_to_reachable(&below);
    let mut above = t.clone();
    above.children[p][slot] = Child::Leaf { color };
    let above = restrict_to_reachable(&above);
    let leaf = leaf_index_of_cut(t, v);
    Ok((
        BrokenTree {
            components: vec![above, below],
            connections: vec![Connection {
                id: 0,
                child: 1,
                parent: 0,
                leaf,
            }],
        },
        length,
    ))
}

/// Number of leaves left of the subtree at `v` in planar order.
fn leaf_index_of_cut(t: &ColoredRootedTree, v: usize) -> usize {
    fn walk(t: &ColoredRootedTree, at: usize, target: usize, count: &mut usize) -> bool {
        for c in &t.children[at] {
            match c {
                Child::Leaf { .. } => *count += 1,
                Child::Vertex { v, .. } => {
                    if *v == target || walk(t, *v, target, count) {
                        return true;
                    }
                }
            }
        }
        false
    }
    let mut count = 0;
    walk(t, t.root_vertex.expect("rooted"), v, &mut count);
    count
}

fn restrict_to_reachable(t: &ColoredRootedTree) -> ColoredRootedTree {
    // canonical() only visits vertices reachable from the root.
    t.canonical()
}

/// All planar shapes with at most `max_vertices` vertices and `max_leaves`
/// leaves, every vertex color 1, every edge color 1 and length 1.
pub fn planar_shapes(max_vertices: usize, max_leaves: usize) -> Vec<ColoredRootedTree> {
    #[derive(Clone)]
    enum S {
        Leaf,
        Node(Vec<S>),
    }
    fn gen(vb: usize, lb: usize) -> Vec<(S, usize, usize)> {
        // (shape, vertices used, leaves used); shape is a vertex.
        let mut out = Vec::new();
        if vb == 0 || lb == 0 {
            return out;
        }
        fn lists(vb: usize, lb: usize) -> Vec<(Vec<S>, usize, usize)> {
            let mut out = vec![(vec![], 0, 0)];
            let mut frontier = vec![(vec![], 0usize, 0usize)];
            while let Some((l, v, c)) = frontier.pop() {
                let mut items: Vec<(S, usize, usize)> = Vec::new();
                if c < lb {
                    items.push((S::Leaf, 0, 1));
                }
                items.extend(gen(vb - v, lb - c));
                for (s, dv, dl) in items {
                    if v + dv <= vb && c + dl <= lb {
                        let mut l2: Vec<S> = l.clone();
                        l2.push(s);
                        out.push((l2.clone(), v + dv, c + dl));
                        frontier.push((l2, v + dv, c + dl));
                    }
                }
            }
            out
        }
        for (children, v, l) in lists(vb - 1, lb) {
            if !children.is_empty() {
                out.push((S::Node(children), v + 1, l));
            }
        }
        out
    }
    fn build(s: &S, t: &mut ColoredRootedTree) -> usize {
        let S::Node(cs) = s else { unreachable!() };
        let v = t.vertex_colors.len();
        t.vertex_colors.push(1);
        t.children.push(vec![]);
        for c in cs {
            let child = match c {
                S::Leaf => Child::Leaf { color: 1 },
                S::Node(_) => Child::Vertex {
                    v: build(c, t),
                    length: BigRational::from_integer(1.into()),
                    color: 1,
                },
            };
            t.children[v].push(child);
        }
        v
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (s, _, _) in gen(max_vertices, max_leaves) {
        let mut t = ColoredRootedTree {
            vertex_colors: vec![],
            children: vec![],
            root_color: 1,
            root_vertex: Some(0),
        };
        build(&s, &mut t);
        if seen.insert(t.encode()) {
            out.push(t);
        }
    }
    out.sort_by_key(|t| t.encode());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Moduli {
    /// Associahedra.
    M,
    /// Multiplihedra.
    N,
}

impl fmt::Display for Moduli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Moduli::M => "M",
            Moduli::N => "N",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Paint {
    Unpainted,
    Frontier,
    Painted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PTree {
    Leaf,
    Node(Paint, Vec<PTree>),
}

impl PTree {
    pub fn corolla(paint: Paint, k: usize) -> PTree {
        PTree::Node(paint, vec![PTree::Leaf; k])
    }

    pub fn leaves(&self) -> usize {
        match self {
            PTree::Leaf => 1,
            PTree::Node(_, cs) => cs.iter().map(PTree::leaves).sum(),
        }
    }

    /// Unpainted and painted vertices contribute `children - 2`, frontier
    /// vertices `children - 1`.
    pub fn dimension(&self) -> usize {
        match self {
            PTree::Leaf => 0,
            PTree::Node(p, cs) => {
                let own = match p {
                    Paint::Frontier => cs.len() - 1,
                    _ => cs.len() - 2,
                };
                own + cs.iter().map(PTree::dimension).sum::<usize>()
            }
        }
    }

    fn encode_into(&self, next: &mut usize, out: &mut String) {
        match self {
            PTree::Leaf => {
                *next += 1;
                out.push_str(&next.to_string());
            }
            PTree::Node(p, cs) => {
                let (l, r) = match p {
                    Paint::Unpainted => ('(', ')'),
                    Paint::Frontier => ('[', ']'),
                    Paint::Painted => ('{', '}'),
                };
                out.push(l);
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    c.encode_into(next, out);
                }
                out.push(r);
            }
        }
    }

    pub fn encode(&self) -> String {
        let mut s = String::new();
        self.encode_into(&mut 0, &mut s);
        s
    }

    pub fn parse(s: &str) -> Result<PTree> {
        let bytes: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let mut next = 0;
        let t = parse_node(&bytes, &mut pos, &mut next)?;
        if pos != bytes.len() {
            return Err(Error::MalformedTree(format!("trailing input in {s}")));
        }
        Ok(t)
    }

    fn has(&self, paint: Paint) -> bool {
        match self {
            PTree::Leaf => false,
            PTree::Node(p, cs) => *p == paint || cs.iter().any(|c| c.has(paint)),
        }
    }

    /// Paint pattern of every root-to-leaf path is `P* F U*` and vertex
    /// valences are stable.
    pub fn is_painted_valid(&self) -> bool {
        fn go(t: &PTree, state: u8) -> bool {
            // state 0: only painted so far; 1: frontier passed.
            match t {
                PTree::Leaf => state == 1,
                PTree::Node(p, cs) => {
                    let (ok, next) = match (p, state) {
                        (Paint::Painted, 0) => (cs.len() >= 2, 0),
                        (Paint::Frontier, 0) => (!cs.is_empty(), 1),
                        (Paint::Unpainted, 1) => (cs.len() >= 2, 1),
                        _ => (false, 0),
                    };
                    ok && cs.iter().all(|c| go(c, next))
                }
            }
        }
        go(self, 0)
    }

    pub fn is_plain_valid(&self) -> bool {
        match self {
            PTree::Leaf => true,
            PTree::Node(p, cs) => *p == Paint::Unpainted && cs.len() >= 2 && cs.iter().all(PTree::is_plain_valid),
        }
    }
}

fn parse_node(s: &[char], pos: &mut usize, next: &mut usize) -> Result<PTree> {
    let err = |m: &str| Error::MalformedTree(m.to_string());
    let Some(&c) = s.get(*pos) else {
        return Err(err("unexpected end"));
    };
    let (paint, close) = match c {
        '(' => (Paint::Unpainted, ')'),
        '[' => (Paint::Frontier, ']'),
        '{' => (Paint::Painted, '}'),
        d if d.is_ascii_digit() => {
            let start = *pos;
            while s.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let n: usize = s[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| err("bad leaf"))?;
            *next += 1;
            if n != *next {
                return Err(err("leaves must be numbered 1..k left to right"));
            }
            return Ok(PTree::Leaf);
        }
        _ => return Err(err("expected a leaf or a bracket")),
    };
    *pos += 1;
    let mut cs = Vec::new();
    loop {
        cs.push(parse_node(s, pos, next)?);
        match s.get(*pos) {
            Some(',') => *pos += 1,
            Some(&c) if c == close => {
                *pos += 1;
                break;
            }
            _ => return Err(err("unbalanced brackets")),
        }
    }
    Ok(PTree::Node(paint, cs))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StratumDescriptor {
    pub moduli: Moduli,
    pub k: usize,
    pub tree: PTree,
    pub codim: usize,
}

/// Position of the weight parameter for a multiplihedron stratum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Zero,
    Finite,
    Infinite,
}

impl StratumDescriptor {
    pub fn top(moduli: Moduli, k: usize) -> Self {
        let paint = match moduli {
            Moduli::M => Paint::Unpainted,
            Moduli::N => Paint::Frontier,
        };
        StratumDescriptor {
            moduli,
            k,
            tree: PTree::corolla(paint, k),
            codim: 0,
        }
    }

    fn from_tree(moduli: Moduli, tree: PTree) -> Self {
        let k = tree.leaves();
        let top = Self::top(moduli, k).tree.dimension();
        let codim = top - tree.dimension();
        StratumDescriptor { moduli, k, tree, codim }
    }

    pub fn encode(&self) -> String {
        self.tree.encode()
    }

    pub fn dimension(&self) -> usize {
        self.tree.dimension()
    }

    pub fn weight(&self) -> Option<Weight> {
        match self.moduli {
            Moduli::M => None,
            Moduli::N if self.tree.has(Paint::Painted) => Some(Weight::Infinite),
            Moduli::N if self.tree.has(Paint::Unpainted) => Some(Weight::Zero),
            Moduli::N => Some(Weight::Finite),
        }
    }
}

/// Strata of one higher codimension in the closure of `s`.
pub fn boundary_map(s: &StratumDescriptor) -> Vec<StratumDescriptor> {
    let mut out: BTreeSet<String> = BTreeSet::new();
    let mut trees = Vec::new();
    for t in splits(&s.tree, s.moduli) {
        if out.insert(t.encode()) {
            trees.push(t);
        }
    }
    let mut v: Vec<StratumDescriptor> = trees
        .into_iter()
        .map(|t| StratumDescriptor::from_tree(s.moduli, t))
        .collect();
    v.sort_by_key(|d| d.encode());
    v
}

fn splits(t: &PTree, moduli: Moduli) -> Vec<PTree> {
    let PTree::Node(p, cs) = t else { return vec![] };
    let mut out = Vec::new();
    let c = cs.len();
    // Group a run of children under a new vertex of the same paint.
    if *p != Paint::Frontier {
        for r in 2..c {
            for i in 0..=c - r {
                let mut new = cs[..i].to_vec();
                new.push(PTree::Node(*p, cs[i..i + r].to_vec()));
                new.extend_from_slice(&cs[i + r..]);
                out.push(PTree::Node(*p, new));
            }
        }
    }
    if *p == Paint::Frontier && moduli == Moduli::N {
        // A run of at least two children moves above the paint line.
        for r in 2..=c {
            for i in 0..=c - r {
                let mut new = cs[..i].to_vec();
                new.push(PTree::Node(Paint::Unpainted, cs[i..i + r].to_vec()));
                new.extend_from_slice(&cs[i + r..]);
                out.push(PTree::Node(Paint::Frontier, new));
            }
        }
        // The paint line moves up: a painted vertex over frontier vertices
        // taking consecutive blocks of children.
        for mask in 1u32..(1u32 << (c - 1)) {
            let mut blocks = Vec::new();
            let mut cur = vec![cs[0].clone()];
            for (j, ch) in cs.iter().enumerate().skip(1) {
                if mask >> (j - 1) & 1 == 1 {
                    blocks.push(PTree::Node(Paint::Frontier, std::mem::take(&mut cur)));
                }
                cur.push(ch.clone());
            }
            blocks.push(PTree::Node(Paint::Frontier, cur));
            out.push(PTree::Node(Paint::Painted, blocks));
        }
    }
    for (j, ch) in cs.iter().enumerate() {
        for sub in splits(ch, moduli) {
            let mut new = cs.clone();
            new[j] = sub;
            out.push(PTree::Node(*p, new));
        }
    }
    out
}

/// All strata of the given codimension, by closure from the top cell;
/// sorted by encoding.
pub fn enumerate_strata(moduli: Moduli, k: usize, codim: usize) -> Vec<StratumDescriptor> {
    all_strata(moduli, k).remove(&codim).unwrap_or_default()
}

/// Every stratum grouped by codimension.
pub fn all_strata(moduli: Moduli, k: usize) -> BTreeMap<usize, Vec<StratumDescriptor>> {
    let mut by_codim: BTreeMap<usize, Vec<StratumDescriptor>> = BTreeMap::new();
    if (moduli == Moduli::M && k < 2) || k == 0 {
        return by_codim;
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let top = StratumDescriptor::top(moduli, k);
    seen.insert(top.encode());
    queue.push_back(top);
    while let Some(s) = queue.pop_front() {
        for b in boundary_map(&s) {
            if seen.insert(b.encode()) {
                queue.push_back(b);
            }
        }
        by_codim.entry(s.codim).or_default().push(s);
    }
    for v in by_codim.values_mut() {
        v.sort_by_key(|d| d.encode());
    }
    by_codim
}

pub fn catalan(n: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..n as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// Pairs `(s, u)` two codimensions apart whose interval does not have
/// exactly two middle elements.
pub fn diamond_violations(moduli: Moduli, k: usize) -> Vec<(String, String)> {
    let strata = all_strata(moduli, k);
    let mut bad = Vec::new();
    for list in strata.values() {
        for s in list {
            let mut count: BTreeMap<String, usize> = BTreeMap::new();
            for t in boundary_map(s) {
                for u in boundary_map(&t) {
                    *count.entry(u.encode()).or_default() += 1;
                }
            }
            for (u, n) in count {
                if n != 2 {
                    bad.push((s.encode(), u));
                }
            }
        }
    }
    bad
}

pub mod naive {
    //! Brute-force stratum enumeration used as an oracle: every planar tree
    //! shape with every paint labelling, filtered by the defining rules.

    use super::*;

    fn shapes(k: usize, allow_unary: bool) -> Vec<PTree> {
        // Children lists: compositions of k; a unary vertex may not sit
        // directly on another unary vertex.
        let mut out = Vec::new();
        if k == 1 {
            out.push(PTree::Leaf);
        }
        for parts in compositions(k) {
            if parts.len() == 1 && !allow_unary {
                continue;
            }
            let unary = parts.len() == 1;
            let options: Vec<Vec<PTree>> = parts.iter().map(|&p| shapes(p, !unary)).collect();
            for_each_choice(&options, &mut Vec::new(), &mut |cs| {
                out.push(PTree::Node(Paint::Unpainted, cs.to_vec()));
            });
        }
        out
    }

    fn compositions(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=k {
            for mut rest in compositions(k - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    fn for_each_choice(options: &[Vec<PTree>], cur: &mut Vec<PTree>, f: &mut dyn FnMut(&[PTree])) {
        if cur.len() == options.len() {
            f(cur);
            return;
        }
        for o in &options[cur.len()] {
            cur.push(o.clone());
            for_each_choice(options, cur, f);
            cur.pop();
        }
    }

    fn labellings(t: &PTree) -> Vec<PTree> {
        match t {
            PTree::Leaf => vec![PTree::Leaf],
            PTree::Node(_, cs) => {
                let options: Vec<Vec<PTree>> = cs.iter().map(labellings).collect();
                let mut out = Vec::new();
                for_each_choice(&options, &mut Vec::new(), &mut |cs| {
                    for p in [Paint::Unpainted, Paint::Frontier, Paint::Painted] {
                        out.push(PTree::Node(p, cs.to_vec()));
                    }
                });
                out
            }
        }
    }

    /// Encodings of all strata grouped by codimension.
    pub fn strata(moduli: Moduli, k: usize) -> BTreeMap<usize, BTreeSet<String>> {
        let mut out: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        let top = match moduli {
            Moduli::M => k.saturating_sub(2),
            Moduli::N => k - 1,
        };
        for shape in shapes(k, moduli == Moduli::N) {
            let candidates = match moduli {
                Moduli::M => vec![shape],
                Moduli::N => labellings(&shape),
            };
            for t in candidates {
                let ok = match moduli {
                    Moduli::M => t.is_plain_valid() && !matches!(t, PTree::Leaf),
                    Moduli::N => t.is_painted_valid(),
                };
                if ok {
                    out.entry(top - t.dimension()).or_default().insert(t.encode());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::rat;

    #[test]
    fn strip_and_coloring_constraint() {
        assert!(is_admissible(&ColoredRootedTree::strip()).unwrap());
        assert!(is_admissible(&ColoredRootedTree::doubly_infinite()).unwrap());
        // Color-0 vertex with a color-1 leaf.
        let bad = ColoredRootedTree::corolla(0, 0, &[1, 0]);
        assert!(!is_admissible(&bad).unwrap());
        let mut broken = ColoredRootedTree::strip();
        broken.root_vertex = Some(3);
        assert!(matches!(is_admissible(&broken), Err(Error::MalformedTree(_))));
    }

    /// Exists a vertex set `S` (the core) that is exactly the color-1
    /// vertices, is empty or connected through the root, and carries every
    /// color-1 exterior edge.
    fn admissible_by_definition(t: &ColoredRootedTree) -> bool {
        let n = t.vertex_colors.len();
        let Some(r) = t.root_vertex else { return true };
        let parents = t.parents();
        (0u32..1 << n).any(|mask| {
            let in_s = |v: usize| mask >> v & 1 == 1;
            let colors_ok = (0..n).all(|v| in_s(v) == (t.vertex_colors[v] == 1));
            let connected = (0..n).all(|v| !in_s(v) || v == r || parents[v].is_some_and(in_s));
            let rooted = mask == 0 || in_s(r);
            let ext_ok = (t.root_color == 0 || in_s(r)) && t.leaves().iter().all(|&(v, _, c)| c == 0 || in_s(v));
            colors_ok && connected && rooted && ext_ok
        })
    }

    fn all_colorings(t: &ColoredRootedTree) -> Vec<ColoredRootedTree> {
        let nv = t.vertex_colors.len();
        let leaves = t.leaves();
        let interior: Vec<(usize, usize)> = (0..nv)
            .flat_map(|v| {
                t.children[v]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| matches!(c, Child::Vertex { .. }))
                    .map(move |(s, _)| (v, s))
            })
            .collect();
        let bits = nv + leaves.len() + 1 + interior.len();
        (0u32..1 << bits)
            .map(|mask| {
                let mut u = t.clone();
                let mut b = 0;
                let mut take = || {
                    b += 1;
                    (mask >> (b - 1) & 1) as u8
                };
                for v in 0..nv {
                    u.vertex_colors[v] = take();
                }
                u.root_color = take();
                for &(v, s, _) in &leaves {
                    u.children[v][s] = Child::Leaf { color: take() };
                }
                for &(v, s) in &interior {
                    if let Child::Vertex { color, .. } = &mut u.children[v][s] {
                        *color = take();
                    }
                }
                u
            })
            .collect()
    }

    #[test]
    fn admissibility_matches_definition_on_small_trees() {
        let mut checked = 0;
        for shape in planar_shapes(2, 3) {
            for t in all_colorings(&shape) {
                assert_eq!(
                    is_admissible(&t).unwrap(),
                    admissible_by_definition(&t),
                    "{}",
                    t.encode()
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn glue_two_corollas_and_break_back() {
        let b = BrokenTree {
            components: vec![
                ColoredRootedTree::corolla(1, 1, &[1, 0]),
                ColoredRootedTree::corolla(1, 1, &[1, 1]),
            ],
            connections: vec![Connection {
                id: 0,
                child: 1,
                parent: 0,
                leaf: 0,
            }],
        };
        let t = glue(&b, &[rat(3, 2)]).unwrap();
        assert_eq!(t.vertex_colors.len(), 2);
        assert_eq!(t.encode(), "R1:1(3/2/1:1(L1,L1),L0)");
        let (back, len) = break_edge(&t, 1).unwrap();
        assert_eq!(len, rat(3, 2));
        assert_eq!(back, b.canonical());
        assert_eq!(
            glue(&b, &[rat(0, 1)]),
            Err(Error::BadConnection("gluing length 0 must be positive".into()))
        );
        let mut clash = b.clone();
        clash.connections[0].leaf = 1;
        assert_eq!(glue(&clash, &[rat(1, 1)]), Err(Error::ColorMismatch(0)));
    }

    #[test]
    fn break_then_glue_is_identity() {
        for t in planar_shapes(3, 4) {
            for v in 1..t.vertex_colors.len() {
                let (b, len) = break_edge(&t, v).unwrap();
                assert_eq!(glue(&b, &[len]).unwrap().encode(), t.encode());
            }
        }
    }

    /// Broken trees from shapes: component 0 plus children attached to
    /// distinct leaves of earlier components.
    fn broken_trees(max_components: usize, max_leaves: usize) -> Vec<BrokenTree> {
        let shapes = planar_shapes(2, 3);
        let mut out = Vec::new();
        fn grow(
            cur: BrokenTree,
            shapes: &[ColoredRootedTree],
            max_components: usize,
            max_leaves: usize,
            out: &mut Vec<BrokenTree>,
        ) {
            let total: usize = cur.components.iter().map(|c| c.leaf_count()).sum::<usize>() - cur.connections.len();
            if total > max_leaves {
                return;
            }
            out.push(cur.clone());
            if cur.components.len() == max_components {
                return;
            }
            let child = cur.components.len();
            for parent in 0..child {
                for leaf in 0..cur.components[parent].leaf_count() {
                    if cur.connections.iter().any(|c| c.parent == parent && c.leaf == leaf) {
                        continue;
                    }
                    for s in shapes {
                        let mut next = cur.clone();
                        next.components.push(s.clone());
                        next.connections.push(Connection {
                            id: child - 1,
                            child,
                            parent,
                            leaf,
                        });
                        grow(next, shapes, max_components, max_leaves, out);
                    }
                }
            }
        }
        for s in &shapes {
            grow(
                BrokenTree::single(s.clone()),
                &shapes,
                max_components,
                max_leaves,
                &mut out,
            );
        }
        out
    }

    #[test]
    fn partial_gluing_is_associative() {
        let trees = broken_trees(3, 5);
        assert!(trees.len() > 100);
        for b in &trees {
            let ids: Vec<usize> = b.connections.iter().map(|c| c.id).collect();
            let n = ids.len();
            for m1 in 0u32..1 << n {
                for m2 in 0u32..1 << n {
                    if m1 & m2 != 0 {
                        continue;
                    }
                    let pick = |m: u32| -> BTreeMap<usize, BigRational> {
                        (0..n)
                            .filter(|i| m >> i & 1 == 1)
                            .map(|i| (ids[i], rat(i as i64 + 1, 2)))
                            .collect()
                    };
                    let step = b.glue_partial(&pick(m1)).unwrap().glue_partial(&pick(m2)).unwrap();
                    let once = b.glue_partial(&pick(m1 | m2)).unwrap();
                    assert_eq!(step.canonical(), once.canonical());
                }
            }
        }
    }

    #[test]
    fn admissible_gluing_preserves_admissibility() {
        let mut checked = 0;
        for b in broken_trees(2, 4) {
            let base = b.components.clone();
            let colorings: Vec<Vec<ColoredRootedTree>> = base.iter().map(all_colorings).collect();
            for c0 in &colorings[0] {
                for c1 in colorings.get(1).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let mut bt = b.clone();
                    bt.components = vec![c0.clone(), c1.clone()];
                    if bt.validate().is_err() || !bt.is_admissible_gluing().unwrap() {
                        continue;
                    }
                    let t = glue(&bt, &[rat(1, 1)]).unwrap();
                    assert!(is_admissible(&t).unwrap(), "{}", t.encode());
                    checked += 1;
                }
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn stability_flags_low_valence_color_one() {
        assert_eq!(ColoredRootedTree::strip().unstable_vertices(), vec![0]);
        assert!(ColoredRootedTree::corolla(1, 1, &[1, 1]).unstable_vertices().is_empty());
        assert!(ColoredRootedTree::corolla(0, 0, &[0]).unstable_vertices().is_empty());
    }

    #[test]
    fn associahedron_counts() {
        assert_eq!(enumerate_strata(Moduli::M, 4, 0).len(), 1);
        for k in 2..=6 {
            assert_eq!(enumerate_strata(Moduli::M, k, k - 2).len() as u64, catalan(k - 1));
            let facets: usize = (2..k).map(|i| k - i + 1).sum();
            assert_eq!(enumerate_strata(Moduli::M, k, 1).len(), facets, "k={k}");
        }
        let top = StratumDescriptor::top(Moduli::M, 5);
        assert_eq!(boundary_map(&top).len(), 9);
        let codim1: Vec<String> = enumerate_strata(Moduli::M, 4, 1).iter().map(|s| s.encode()).collect();
        assert_eq!(
            codim1,
            [
                "((1,2),3,4)",
                "((1,2,3),4)",
                "(1,(2,3),4)",
                "(1,(2,3,4))",
                "(1,2,(3,4))"
            ]
        );
    }

    #[test]
    fn multiplihedron_vertices_and_strip() {
        // Vertex counts of the multiplihedra: 1, 2, 6, 21.
        for (k, v) in [(1, 1), (2, 2), (3, 6), (4, 21)] {
            assert_eq!(enumerate_strata(Moduli::N, k, k - 1).len(), v, "k={k}");
        }
        assert!(boundary_map(&StratumDescriptor::top(Moduli::N, 1)).is_empty());
        let c1: Vec<String> = enumerate_strata(Moduli::N, 2, 1).iter().map(|s| s.encode()).collect();
        assert_eq!(c1, ["[(1,2)]", "{[1],[2]}"]);
    }

    #[test]
    fn closure_enumeration_matches_naive_oracle() {
        for k in 1..=4 {
            let naive = naive::strata(Moduli::N, k);
            let ours = all_strata(Moduli::N, k);
            assert_eq!(
                naive.keys().collect::<Vec<_>>(),
                ours.keys().collect::<Vec<_>>(),
                "k={k}"
            );
            for (c, list) in ours {
                let enc: BTreeSet<String> = list.iter().map(|s| s.encode()).collect();
                assert_eq!(enc, naive[&c], "N k={k} codim={c}");
            }
        }
        for k in 2..=5 {
            let naive = naive::strata(Moduli::M, k);
            for (c, list) in all_strata(Moduli::M, k) {
                let enc: BTreeSet<String> = list.iter().map(|s| s.encode()).collect();
                assert_eq!(enc, naive[&c], "M k={k} codim={c}");
            }
        }
    }

    #[test]
    fn face_posets_are_thin() {
        for k in 2..=5 {
            assert!(diamond_violations(Moduli::M, k).is_empty(), "M k={k}");
        }
        for k in 1..=4 {
            assert!(diamond_violations(Moduli::N, k).is_empty(), "N k={k}");
        }
    }

    #[test]
    fn encodings_parse_back() {
        for k in 1..=4 {
            for list in all_strata(Moduli::N, k).values() {
                for s in list {
                    assert_eq!(PTree::parse(&s.encode()).unwrap(), s.tree);
                }
            }
        }
        assert!(PTree::parse("(2,1)").is_err());
        assert!(PTree::parse("(1,2").is_err());
    }

    #[test]
    fn weights() {
        let top = StratumDescriptor::top(Moduli::N, 2);
        assert_eq!(top.weight(), Some(Weight::Finite));
        let b = boundary_map(&top);
        let w: Vec<Option<Weight>> = b.iter().map(|s| s.weight()).collect();
        assert_eq!(w, [Some(Weight::Zero), Some(Weight::Infinite)]);
    }
}
