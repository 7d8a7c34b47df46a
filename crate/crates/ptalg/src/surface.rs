//! Marked surfaces with partial triangulations as annotated combinatorial maps.
//!
//! A surface is stored as a rotation system: for each marked point the
//! counter-clockwise cyclic list of oriented-edge starts. Faces are traced
//! walks; each face carries a content record (free punctures, bare holes,
//! genus) supplied by the input and checked against the Euler characteristic.
//!
//! Conventions:
//! * boundary components are listed counter-clockwise; the implied boundary
//!   edge `k` runs from `points[k]` to `points[k+1]`, so its backward
//!   orientation is the clockwise one that may occur as a face side;
//! * at a boundary point the rotation is the fan
//!   `[cw-outgoing, arc ends .., ccw-outgoing]`;
//! * the side following `u` in a face is the counter-clockwise predecessor
//!   of `-u` around `t(u)`.

use crate::error::{Error, Violation};
use crate::field::Field;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub type PointIx = usize;
pub type EdgeIx = usize;
pub type FaceIx = usize;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OrientedEdge {
    pub edge: EdgeIx,
    pub forward: bool,
}

impl OrientedEdge {
    pub fn fwd(edge: EdgeIx) -> Self {
        OrientedEdge {
            edge,
            forward: true,
        }
    }
    pub fn bwd(edge: EdgeIx) -> Self {
        OrientedEdge {
            edge,
            forward: false,
        }
    }
    pub fn rev(self) -> Self {
        OrientedEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Location {
    Interior,
    Boundary(usize),
}

#[derive(Clone, Debug)]
pub struct MarkedPoint<F> {
    pub name: String,
    pub m: u64,
    pub lambda: F,
    pub location: Location,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Arc,
    /// Boundary edge `index` of boundary component `component`.
    Boundary {
        component: usize,
        index: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub name: String,
    pub from: PointIx,
    pub to: PointIx,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_arc(&self) -> bool {
        matches!(self.kind, EdgeKind::Arc)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Content {
    EmptyDisk,
    OnePuncture(PointIx),
    Big,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Side cycle, rotated so the lexicographically least token comes first.
    pub sides: Vec<OrientedEdge>,
    pub punctures: BTreeSet<PointIx>,
    pub holes: u64,
    pub genus: u64,
}

impl Face {
    pub fn content(&self) -> Content {
        if self.holes == 0 && self.genus == 0 {
            match self.punctures.len() {
                0 => Content::EmptyDisk,
                1 => Content::OnePuncture(*self.punctures.iter().next().unwrap()),
                _ => Content::Big,
            }
        } else {
            Content::Big
        }
    }

    fn chi(&self) -> i64 {
        1 - self.holes as i64 - 2 * self.genus as i64
    }
}

/// Raw, name-based description of a surface; the bridge between the JSON
/// document, test builders and [`Surface`].
#[derive(Clone, Debug)]
pub struct RawSurface<F> {
    /// name, multiplicity, coefficient, boundary component name (if any)
    pub points: Vec<(String, u64, F, Option<String>)>,
    /// name, counter-clockwise cyclic list of point names
    pub boundaries: Vec<(String, Vec<String>)>,
    /// name, from, to
    pub arcs: Vec<(String, String, String)>,
    /// point name -> ccw cyclic list of oriented-end tokens
    pub rotations: BTreeMap<String, Vec<String>>,
    /// anchor token, free punctures, bare holes, genus
    pub faces: Vec<(String, Vec<String>, u64, u64)>,
    pub genus: u64,
    pub boundary_count: u64,
}

#[derive(Clone, Debug)]
pub struct Surface<F> {
    pub points: Vec<MarkedPoint<F>>,
    pub boundaries: Vec<(String, Vec<PointIx>)>,
    pub edges: Vec<Edge>,
    /// Per point, ccw cyclic list of oriented-edge starts; empty for free punctures.
    pub rotations: Vec<Vec<OrientedEdge>>,
    pub faces: Vec<Face>,
    pub genus: u64,
    pub boundary_count: u64,
    pos: HashMap<OrientedEdge, (PointIx, usize)>,
    face_of: HashMap<OrientedEdge, (FaceIx, usize)>,
    point_ix: HashMap<String, PointIx>,
    edge_ix: HashMap<String, EdgeIx>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UPlus {
    Empty,
    Next(OrientedEdge),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ComponentClass {
    FiniteRank,
    Lattice,
    NotFiniteOverCentre,
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentClass::FiniteRank => write!(f, "FiniteRank"),
            ComponentClass::Lattice => write!(f, "Lattice"),
            ComponentClass::NotFiniteOverCentre => write!(f, "NotFiniteOverCentre"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FlipOutcome {
    /// Set when a special-monogon reduction was applied before flipping.
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct SpecialLoop {
    /// Oriented side enclosing the special monogon.
    pub side: OrientedEdge,
    pub puncture: PointIx,
    /// The radius arc pointing to the special puncture, when present.
    pub radius: Option<EdgeIx>,
}

impl<F: Field> Surface<F> {
    // ---------------------------------------------------------------- build

    pub fn from_raw(raw: &RawSurface<F>) -> Result<Surface<F>, Error> {
        let (surface, violations) = Surface::build(raw)?;
        if violations.is_empty() {
            Ok(surface)
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Structural build; hypothesis-level problems are returned as a list so
    /// `validate` can report all of them at once.
    pub fn build(raw: &RawSurface<F>) -> Result<(Surface<F>, Vec<Violation>), Error> {
        let mut violations = Vec::new();
        let bad = |msg: String| Error::Validation(vec![Violation::MapInconsistent(msg)]);

        // Points, sorted by name for determinism.
        let mut points: Vec<MarkedPoint<F>> = Vec::new();
        let mut bnames: Vec<String> = raw.boundaries.iter().map(|(n, _)| n.clone()).collect();
        bnames.sort();
        bnames.dedup();
        if bnames.len() != raw.boundaries.len() {
            return Err(bad("duplicate boundary names".into()));
        }
        let bix: HashMap<String, usize> =
            bnames.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut sorted_points = raw.points.clone();
        sorted_points.sort_by(|a, b| a.0.cmp(&b.0));
        let mut point_ix = HashMap::new();
        for (name, m, lambda, bnd) in &sorted_points {
            if point_ix.contains_key(name) {
                return Err(bad(format!("duplicate point {name}")));
            }
            let location = match bnd {
                None => Location::Interior,
                Some(b) => Location::Boundary(
                    *bix.get(b)
                        .ok_or_else(|| bad(format!("unknown boundary {b}")))?,
                ),
            };
            point_ix.insert(name.clone(), points.len());
            points.push(MarkedPoint {
                name: name.clone(),
                m: *m,
                lambda: lambda.clone(),
                location,
            });
        }

        let mut boundaries: Vec<(String, Vec<PointIx>)> = Vec::new();
        for name in &bnames {
            let pts = &raw.boundaries.iter().find(|(n, _)| n == name).unwrap().1;
            if pts.is_empty() {
                return Err(bad(format!("boundary {name} has no marked points")));
            }
            let mut ixs = Vec::new();
            for p in pts {
                let ix = *point_ix
                    .get(p)
                    .ok_or_else(|| bad(format!("unknown point {p}")))?;
                if points[ix].location != Location::Boundary(boundaries.len()) {
                    return Err(bad(format!("point {p} not declared on boundary {name}")));
                }
                ixs.push(ix);
            }
            boundaries.push((name.clone(), ixs));
        }
        for (i, p) in points.iter().enumerate() {
            if let Location::Boundary(b) = p.location {
                if !boundaries[b].1.contains(&i) {
                    return Err(bad(format!("point {} missing from its boundary list", p.name)));
                }
            }
        }

        // Edges: arcs sorted by name, then boundary edges per component.
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_ix = HashMap::new();
        let mut sorted_arcs = raw.arcs.clone();
        sorted_arcs.sort_by(|a, b| a.0.cmp(&b.0));
        for (name, from, to) in &sorted_arcs {
            if edge_ix.contains_key(name) {
                return Err(bad(format!("duplicate arc {name}")));
            }
            let f = *point_ix
                .get(from)
                .ok_or_else(|| bad(format!("unknown point {from}")))?;
            let t = *point_ix
                .get(to)
                .ok_or_else(|| bad(format!("unknown point {to}")))?;
            edge_ix.insert(name.clone(), edges.len());
            edges.push(Edge {
                name: name.clone(),
                from: f,
                to: t,
                kind: EdgeKind::Arc,
            });
        }
        for (b, (bname, pts)) in boundaries.iter().enumerate() {
            let n = pts.len();
            for k in 0..n {
                let name = format!("bnd:{bname}:{k}");
                edge_ix.insert(name.clone(), edges.len());
                edges.push(Edge {
                    name,
                    from: pts[k],
                    to: pts[(k + 1) % n],
                    kind: EdgeKind::Boundary {
                        component: b,
                        index: k,
                    },
                });
            }
        }

        // Rotations.
        let mut rotations: Vec<Vec<OrientedEdge>> = vec![Vec::new(); points.len()];
        let mut seen: HashMap<OrientedEdge, String> = HashMap::new();
        for (pname, ends) in &raw.rotations {
            let p = *point_ix
                .get(pname)
                .ok_or_else(|| bad(format!("unknown point {pname} in rotations")))?;
            let mut rot = Vec::new();
            for token in ends {
                let oe = parse_end_token(token, &edge_ix)
                    .ok_or_else(|| bad(format!("bad end token {token}")))?;
                if let Some(prev) = seen.insert(oe, pname.clone()) {
                    return Err(bad(format!(
                        "end {token} appears at both {prev} and {pname}"
                    )));
                }
                rot.push(oe);
            }
            rotations[p] = rot;
        }
        // Every oriented edge must start at exactly one rotation slot, at the
        // right point.
        for (e, edge) in edges.iter().enumerate() {
            for forward in [true, false] {
                let oe = OrientedEdge { edge: e, forward };
                let start = if forward { edge.from } else { edge.to };
                match seen.get(&oe) {
                    None => {
                        return Err(bad(format!(
                            "end of edge {} (forward={forward}) missing from rotations",
                            edge.name
                        )))
                    }
                    Some(pname) => {
                        if point_ix[pname] != start {
                            return Err(bad(format!(
                                "end of edge {} listed at {} instead of {}",
                                edge.name, pname, points[start].name
                            )));
                        }
                    }
                }
            }
        }

        // Boundary fan convention: the ccw-outgoing end is immediately
        // followed (ccw) by the cw-outgoing end.
        for (b, (bname, pts)) in boundaries.iter().enumerate() {
            let n = pts.len();
            for (i, &p) in pts.iter().enumerate() {
                let ccw_out = OrientedEdge::fwd(edge_ix[&format!("bnd:{bname}:{i}")]);
                let prev = (i + n - 1) % n;
                let cw_out = OrientedEdge::bwd(edge_ix[&format!("bnd:{bname}:{prev}")]);
                let rot = &rotations[p];
                let at = rot.iter().position(|&x| x == ccw_out).ok_or_else(|| {
                    bad(format!("boundary end missing at {}", points[p].name))
                })?;
                if rot[(at + 1) % rot.len()] != cw_out {
                    return Err(bad(format!(
                        "boundary fan broken at {} of component {} ({b})",
                        points[p].name, bname
                    )));
                }
            }
        }

        // Canonical rotation order: least token first.
        for (p, rot) in rotations.iter_mut().enumerate() {
            let _ = p;
            canonical_rotate(rot, |oe| end_token(&edges, *oe));
        }
        let mut pos = HashMap::new();
        for (p, rot) in rotations.iter().enumerate() {
            for (i, &oe) in rot.iter().enumerate() {
                pos.insert(oe, (p, i));
            }
        }

        let mut surface = Surface {
            points,
            boundaries,
            edges,
            rotations,
            faces: Vec::new(),
            genus: raw.genus,
            boundary_count: raw.boundary_count,
            pos,
            face_of: HashMap::new(),
            point_ix,
            edge_ix,
        };

        // Trace faces and match declared contents.
        let traced = surface.trace_faces()?;
        let mut face_records: Vec<Face> = traced
            .into_iter()
            .map(|sides| Face {
                sides,
                punctures: BTreeSet::new(),
                holes: 0,
                genus: 0,
            })
            .collect();
        let mut claimed = vec![false; face_records.len()];
        for (anchor, punct, holes, genus) in &raw.faces {
            let oe = parse_end_token(anchor, &surface.edge_ix)
                .ok_or_else(|| bad(format!("bad face anchor {anchor}")))?;
            let fi = face_records
                .iter()
                .position(|f| f.sides.contains(&oe))
                .ok_or_else(|| bad(format!("face anchor {anchor} matches no traced face")))?;
            if claimed[fi] {
                return Err(bad(format!("face anchored at {anchor} described twice")));
            }
            claimed[fi] = true;
            for p in punct {
                let ix = *surface
                    .point_ix
                    .get(p)
                    .ok_or_else(|| bad(format!("unknown puncture {p}")))?;
                face_records[fi].punctures.insert(ix);
            }
            face_records[fi].holes = *holes;
            face_records[fi].genus = *genus;
        }
        surface.faces = face_records;
        surface.index_faces();

        surface.check_invariants(&mut violations);
        Ok((surface, violations))
    }

    fn index_faces(&mut self) {
        for f in &mut self.faces {
            let edges = &self.edges;
            canonical_rotate(&mut f.sides, |oe| end_token(edges, *oe));
        }
        self.faces.sort_by(|a, b| {
            end_token(&self.edges, a.sides[0]).cmp(&end_token(&self.edges, b.sides[0]))
        });
        self.face_of.clear();
        for (fi, f) in self.faces.iter().enumerate() {
            for (i, &s) in f.sides.iter().enumerate() {
                self.face_of.insert(s, (fi, i));
            }
        }
    }

    /// Orbits of the side-successor map, excluding the ccw boundary circles.
    fn trace_faces(&self) -> Result<Vec<Vec<OrientedEdge>>, Error> {
        let mut faces = Vec::new();
        let mut visited: BTreeSet<OrientedEdge> = BTreeSet::new();
        let mut all: Vec<OrientedEdge> = Vec::new();
        for e in 0..self.edges.len() {
            all.push(OrientedEdge::fwd(e));
            all.push(OrientedEdge::bwd(e));
        }
        for &start in &all {
            if visited.contains(&start) {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = start;
            loop {
                if !visited.insert(cur) {
                    return Err(Error::Validation(vec![Violation::MapInconsistent(
                        "face tracing revisited a side".into(),
                    )]));
                }
                cycle.push(cur);
                cur = self.next_side(cur);
                if cur == start {
                    break;
                }
            }
            let all_ccw_boundary = cycle.iter().all(|oe| self.is_ccw_boundary(*oe));
            if all_ccw_boundary {
                // The outside of a marked boundary component; not a face.
                continue;
            }
            if cycle.iter().any(|oe| self.is_ccw_boundary(*oe)) {
                return Err(Error::Validation(vec![Violation::MapInconsistent(
                    "a face mixes ccw boundary edges with other sides".into(),
                )]));
            }
            faces.push(cycle);
        }
        Ok(faces)
    }

    fn check_invariants(&self, out: &mut Vec<Violation>) {
        // Coefficients.
        for p in &self.points {
            if p.lambda.is_zero() {
                out.push(Violation::ZeroCoefficient(p.name.clone()));
            }
            if p.m == 0 {
                out.push(Violation::HypothesisViolated(format!(
                    "multiplicity of {} must be positive",
                    p.name
                )));
            }
        }
        if self.nu().is_zero() {
            out.push(Violation::HypothesisViolated(
                "coefficient nu = 1 - prod(lambda) vanishes".into(),
            ));
        }

        // Free punctures: no rotation, in exactly one face.
        for (i, p) in self.points.iter().enumerate() {
            let free = self.rotations[i].is_empty();
            let count = self
                .faces
                .iter()
                .filter(|f| f.punctures.contains(&i))
                .count();
            if free {
                if p.location != Location::Interior {
                    out.push(Violation::MapInconsistent(format!(
                        "boundary point {} has no incident edge",
                        p.name
                    )));
                }
                if count != 1 {
                    out.push(Violation::MapInconsistent(format!(
                        "free puncture {} assigned to {count} faces",
                        p.name
                    )));
                }
            } else if count != 0 {
                out.push(Violation::MapInconsistent(format!(
                    "incident point {} also listed as a free puncture",
                    p.name
                )));
            }
        }

        // Euler characteristic.
        let v = self
            .rotations
            .iter()
            .filter(|r| !r.is_empty())
            .count() as i64;
        let e = self.edges.len() as i64;
        let chi_faces: i64 = self.faces.iter().map(|f| f.chi()).sum();
        let declared = 2 - 2 * self.genus as i64 - self.boundary_count as i64;
        if v - e + chi_faces != declared {
            out.push(Violation::EulerMismatch(format!(
                "V - E + sum chi(f) = {} but declared surface has chi = {}",
                v - e + chi_faces,
                declared
            )));
        }
        let bare_holes: u64 = self.faces.iter().map(|f| f.holes).sum();
        if self.boundary_count != self.boundaries.len() as u64 + bare_holes {
            out.push(Violation::EulerMismatch(format!(
                "declared boundary count {} != {} listed + {} bare holes",
                self.boundary_count,
                self.boundaries.len(),
                bare_holes
            )));
        }

        // Degenerate faces betray contractible or parallel edges.
        for f in &self.faces {
            if f.content() == Content::EmptyDisk {
                if f.sides.len() == 1 {
                    out.push(Violation::MapInconsistent(format!(
                        "edge {} bounds an empty monogon (contractible)",
                        self.edges[f.sides[0].edge].name
                    )));
                }
                if f.sides.len() == 2 && f.sides[0].edge != f.sides[1].edge {
                    out.push(Violation::MapInconsistent(format!(
                        "edges {} and {} bound an empty digon (homotopic)",
                        self.edges[f.sides[0].edge].name, self.edges[f.sides[1].edge].name
                    )));
                }
            }
        }

        // Global hypotheses.
        let closed_sphere = self.genus == 0 && self.boundary_count == 0;
        let n_marked = self.points.len();
        if closed_sphere && n_marked < 3 {
            out.push(Violation::HypothesisViolated(
                "a sphere needs at least three marked points".into(),
            ));
        }
        if closed_sphere && n_marked == 3 && self.points.iter().any(|p| p.m == 1) {
            out.push(Violation::HypothesisViolated(
                "on a sphere with three marked points every multiplicity must exceed 1".into(),
            ));
        }
        let is_disc = self.genus == 0
            && self.boundary_count == 1
            && self.boundaries.len() == 1;
        if is_disc && n_marked < 3 {
            let punctures: Vec<_> = self
                .points
                .iter()
                .filter(|p| p.location == Location::Interior)
                .collect();
            let ok = punctures.len() >= 2 || punctures.iter().any(|p| p.m > 1);
            if !ok {
                out.push(Violation::HypothesisViolated(
                    "a disc with fewer than three marked points needs two punctures or one of multiplicity > 1".into(),
                ));
            }
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        self.check_invariants(&mut v);
        v
    }

    // ------------------------------------------------------------- queries

    pub fn point_index(&self, name: &str) -> Option<PointIx> {
        self.point_ix.get(name).copied()
    }

    pub fn edge_index(&self, name: &str) -> Option<EdgeIx> {
        self.edge_ix.get(name).copied()
    }

    pub fn arc_indices(&self) -> Vec<EdgeIx> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].is_arc())
            .collect()
    }

    pub fn oriented_arcs(&self) -> Vec<OrientedEdge> {
        let mut v = Vec::new();
        for e in self.arc_indices() {
            v.push(OrientedEdge::fwd(e));
            v.push(OrientedEdge::bwd(e));
        }
        v
    }

    pub fn s(&self, oe: OrientedEdge) -> PointIx {
        let e = &self.edges[oe.edge];
        if oe.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn t(&self, oe: OrientedEdge) -> PointIx {
        self.s(oe.rev())
    }

    pub fn is_boundary_edge(&self, e: EdgeIx) -> bool {
        !self.edges[e].is_arc()
    }

    /// Counter-clockwise (forward) boundary edges never occur as face sides.
    pub fn is_ccw_boundary(&self, oe: OrientedEdge) -> bool {
        self.is_boundary_edge(oe.edge) && oe.forward
    }

    pub fn rotation_at(&self, p: PointIx) -> &[OrientedEdge] {
        &self.rotations[p]
    }

    pub fn position(&self, oe: OrientedEdge) -> (PointIx, usize) {
        self.pos[&oe]
    }

    /// Next oriented-edge start counter-clockwise around the common point.
    pub fn succ(&self, oe: OrientedEdge) -> OrientedEdge {
        let (p, i) = self.pos[&oe];
        let rot = &self.rotations[p];
        rot[(i + 1) % rot.len()]
    }

    pub fn pred(&self, oe: OrientedEdge) -> OrientedEdge {
        let (p, i) = self.pos[&oe];
        let rot = &self.rotations[p];
        rot[(i + rot.len() - 1) % rot.len()]
    }

    /// The side following `oe` in its face.
    pub fn next_side(&self, oe: OrientedEdge) -> OrientedEdge {
        self.pred(oe.rev())
    }

    pub fn prev_side(&self, oe: OrientedEdge) -> OrientedEdge {
        self.succ(oe).rev()
    }

    /// Number of arc ends at `p` (boundary edges not counted).
    pub fn arc_degree(&self, p: PointIx) -> u64 {
        self.rotations[p]
            .iter()
            .filter(|oe| self.edges[oe.edge].is_arc())
            .count() as u64
    }

    /// Number of oriented-edge positions at `p`, boundary ends included.
    pub fn full_degree(&self, p: PointIx) -> u64 {
        self.rotations[p].len() as u64
    }

    pub fn m(&self, p: PointIx) -> u64 {
        self.points[p].m
    }

    pub fn lambda(&self, p: PointIx) -> F {
        self.points[p].lambda.clone()
    }

    pub fn is_interior(&self, p: PointIx) -> bool {
        self.points[p].location == Location::Interior
    }

    /// An arc not incident to any boundary point.
    pub fn arc_is_inner(&self, e: EdgeIx) -> bool {
        self.edges[e].is_arc()
            && self.is_interior(self.edges[e].from)
            && self.is_interior(self.edges[e].to)
    }

    pub fn lambda_product(&self) -> F {
        let mut acc = match self.points.first() {
            Some(p) => p.lambda.int_like(1),
            None => return F::one(),
        };
        for p in &self.points {
            acc = acc * p.lambda.clone();
        }
        acc
    }

    /// nu = 1 - prod(lambda) on a sphere with four marked points all of
    /// multiplicity one; 1 otherwise.
    pub fn nu(&self) -> F {
        let sphere4 = self.genus == 0
            && self.boundary_count == 0
            && self.points.len() == 4
            && self.points.iter().all(|p| p.m == 1);
        if sphere4 {
            let prod = self.lambda_product();
            prod.int_like(1) - prod
        } else {
            match self.points.first() {
                Some(p) => p.lambda.int_like(1),
                None => F::one(),
            }
        }
    }

    pub fn char_is_two(&self) -> bool {
        self.points
            .first()
            .map(|p| p.lambda.char_is_two())
            .unwrap_or(false)
    }

    /// The face having `oe` as a side, with the cycle rotated to start at `oe`.
    pub fn face_at(&self, oe: OrientedEdge) -> (FaceIx, Vec<OrientedEdge>) {
        let (fi, i) = self.face_of[&oe];
        let sides = &self.faces[fi].sides;
        let mut rotated = Vec::with_capacity(sides.len());
        for k in 0..sides.len() {
            rotated.push(sides[(i + k) % sides.len()]);
        }
        (fi, rotated)
    }

    pub fn face_index_of(&self, oe: OrientedEdge) -> FaceIx {
        self.face_of[&oe].0
    }

    /// The minimal polygon having `oe` as an oriented side: the traced face,
    /// rotated to start at `oe`. Counter-clockwise boundary edges bound no
    /// polygon.
    pub fn minimal_polygon(&self, oe: OrientedEdge) -> Result<(FaceIx, Vec<OrientedEdge>), Error> {
        if self.is_ccw_boundary(oe) {
            return Err(Error::CcwBoundaryEdge);
        }
        Ok(self.face_at(oe))
    }

    /// Clockwise cyclic order test: are the given positions (duplicates
    /// collapsed) arranged clockwise around their common point?
    fn ordered_clockwise(&self, items: &[OrientedEdge]) -> bool {
        let mut distinct: Vec<OrientedEdge> = Vec::new();
        for &x in items {
            if !distinct.contains(&x) {
                distinct.push(x);
            }
        }
        if distinct.len() <= 2 {
            return true;
        }
        let p = self.s(distinct[0]);
        let n = self.rotations[p].len();
        // positions in clockwise order = reversed rotation
        let cw_index = |oe: OrientedEdge| -> usize {
            let (q, i) = self.pos[&oe];
            assert_eq!(q, p);
            (n - i) % n
        };
        let base = cw_index(distinct[0]);
        let rel: Vec<usize> = distinct
            .iter()
            .map(|&x| (cw_index(x) + n - base) % n)
            .collect();
        rel.windows(2).all(|w| w[0] < w[1])
    }

    /// The combinatorial polygon conditions for a traced face: sides
    /// pairwise distinct, boundary sides clockwise, and the local clockwise
    /// ordering constraints around every shared corner.
    pub fn face_satisfies_polygon_conditions(&self, sides: &[OrientedEdge]) -> bool {
        let n = sides.len();
        for i in 0..n {
            for j in 0..n {
                if i != j && sides[i] == sides[j] {
                    return false;
                }
            }
        }
        for &s in sides {
            if self.is_ccw_boundary(s) {
                return false;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j || self.s(sides[i]) != self.s(sides[j]) {
                    continue;
                }
                let prev_i = sides[(i + n - 1) % n].rev();
                let prev_j = sides[(j + n - 1) % n].rev();
                if !self.ordered_clockwise(&[prev_i, sides[i], prev_j, sides[j]]) {
                    return false;
                }
            }
            // versus every boundary end at the same point
            let p = self.s(sides[i]);
            for &b in &self.rotations[p] {
                if !self.is_boundary_edge(b.edge) {
                    continue;
                }
                let prev_i = sides[(i + n - 1) % n].rev();
                if !self.ordered_clockwise(&[prev_i, sides[i], b]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn end_token(&self, oe: OrientedEdge) -> String {
        end_token(&self.edges, oe)
    }

    /// Detect whether `side` encloses a special monogon: a loop around a
    /// single puncture of multiplicity one, with or without the radius arc.
    pub fn special_loop(&self, side: OrientedEdge) -> Option<SpecialLoop> {
        if self.is_boundary_edge(side.edge) || self.s(side) != self.t(side) {
            return None;
        }
        let (fi, sides) = self.face_at(side);
        let f = &self.faces[fi];
        match sides.len() {
            1 => {
                if let Content::OnePuncture(mp) = f.content() {
                    if self.m(mp) == 1 {
                        return Some(SpecialLoop {
                            side,
                            puncture: mp,
                            radius: None,
                        });
                    }
                }
                None
            }
            3 => {
                // (side, r, -r) with the radius r pointing to a degree-one
                // puncture of multiplicity one.
                if f.content() != Content::EmptyDisk {
                    return None;
                }
                let r = sides[1];
                if sides[2] != r.rev() || r.edge == side.edge {
                    return None;
                }
                let mp = self.t(r);
                if self.is_interior(mp)
                    && self.m(mp) == 1
                    && self.full_degree(mp) == 1
                    && self.s(r) == self.s(side)
                {
                    Some(SpecialLoop {
                        side,
                        puncture: mp,
                        radius: Some(r.edge),
                    })
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn special_loops(&self) -> Vec<SpecialLoop> {
        let mut v = Vec::new();
        for oe in self.oriented_arcs() {
            if let Some(sl) = self.special_loop(oe) {
                v.push(sl);
            }
        }
        v
    }

    /// A 2-special side: a loop enclosing exactly two punctures, both of
    /// multiplicity one.
    pub fn two_special(&self, side: OrientedEdge) -> Option<(PointIx, PointIx)> {
        if self.is_boundary_edge(side.edge) || self.s(side) != self.t(side) {
            return None;
        }
        let (fi, sides) = self.face_at(side);
        let f = &self.faces[fi];
        if sides.len() == 1
            && f.holes == 0
            && f.genus == 0
            && f.punctures.len() == 2
            && f.punctures.iter().all(|&p| self.m(p) == 1)
        {
            let mut it = f.punctures.iter();
            let a = *it.next().unwrap();
            let b = *it.next().unwrap();
            Some((a, b))
        } else {
            None
        }
    }

    // --------------------------------------------------------------- u-plus

    /// The oriented edge following `oe` for the flip construction.
    pub fn u_plus(&self, oe: OrientedEdge) -> UPlus {
        assert!(self.edges[oe.edge].is_arc());
        let sp = self.s(oe);
        let only_arc = self.is_interior(sp)
            && self.rotations[sp]
                .iter()
                .all(|x| x.edge == oe.edge);
        if only_arc {
            return UPlus::Empty;
        }
        let mut nxt = self.succ(oe);
        if nxt == oe.rev() {
            nxt = self.succ(oe.rev());
        }
        UPlus::Next(nxt)
    }

    pub fn is_close_to_boundary(&self, e: EdgeIx) -> bool {
        assert!(self.edges[e].is_arc());
        for oe in [OrientedEdge::fwd(e), OrientedEdge::bwd(e)] {
            if let UPlus::Next(n) = self.u_plus(oe) {
                if self.is_boundary_edge(n.edge) {
                    return true;
                }
            }
        }
        false
    }

    pub fn is_triangulation(&self) -> bool {
        self.faces
            .iter()
            .all(|f| f.sides.len() == 3 && f.content() == Content::EmptyDisk)
    }

    pub fn is_sparse(&self) -> bool {
        // No arc incident to a boundary marked point.
        for e in self.arc_indices() {
            let edge = &self.edges[e];
            if !self.is_interior(edge.from) || !self.is_interior(edge.to) {
                return false;
            }
        }
        for f in &self.faces {
            // No triangle without puncture.
            if f.sides.len() == 3 && f.content() == Content::EmptyDisk {
                return false;
            }
            if f.sides.len() == 1 {
                if let Content::OnePuncture(p) = f.content() {
                    // No special monogon.
                    if self.m(p) == 1 {
                        return false;
                    }
                    // In characteristic two, no monogon around multiplicity 2.
                    if self.char_is_two() && self.m(p) == 2 {
                        return false;
                    }
                }
            }
        }
        // A special monogon with its radius drawn shows up as a self-folded
        // triangle; the enclosing polygon is still special.
        if !self.special_loops().is_empty() {
            return false;
        }
        true
    }

    // ------------------------------------------------------- classification

    /// Connected components of the edge graph (arcs and boundary edges).
    pub fn components(&self) -> Vec<Vec<EdgeIx>> {
        let n = self.points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for e in &self.edges {
            let a = find(&mut parent, e.from);
            let b = find(&mut parent, e.to);
            parent[a] = b;
        }
        let mut by_root: BTreeMap<usize, Vec<EdgeIx>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let r = find(&mut parent, e.from);
            by_root.entry(r).or_default().push(i);
        }
        by_root.into_values().collect()
    }

    /// An arc bounding an empty disk together with boundary edges only.
    pub fn arc_is_boundary_homotopic(&self, e: EdgeIx) -> bool {
        for oe in [OrientedEdge::fwd(e), OrientedEdge::bwd(e)] {
            let (fi, sides) = self.face_at(oe);
            if self.faces[fi].content() == Content::EmptyDisk
                && sides[1..].iter().all(|s| self.is_boundary_edge(s.edge))
            {
                return true;
            }
        }
        false
    }

    pub fn classify_component(&self, component: &[EdgeIx]) -> ComponentClass {
        let mut pts: BTreeSet<PointIx> = BTreeSet::new();
        for &e in component {
            pts.insert(self.edges[e].from);
            pts.insert(self.edges[e].to);
        }
        let touches_boundary = pts.iter().any(|&p| !self.is_interior(p));
        if !touches_boundary {
            return ComponentClass::FiniteRank;
        }

        let n_interior = self
            .points
            .iter()
            .filter(|p| p.location == Location::Interior)
            .count();
        let is_disc = self.genus == 0
            && self.boundary_count == 1
            && self.boundaries.len() == 1;
        // (a) unpunctured polygon with at most one multiplicity above one.
        if is_disc
            && n_interior == 0
            && self.points.iter().filter(|p| p.m > 1).count() <= 1
        {
            return ComponentClass::Lattice;
        }
        // (b) once-punctured polygon, boundary multiplicities all one.
        if is_disc
            && n_interior == 1
            && self
                .points
                .iter()
                .filter(|p| p.location != Location::Interior)
                .all(|p| p.m == 1)
        {
            return ComponentClass::Lattice;
        }
        // (c) all incident multiplicities one and all arcs boundary-homotopic.
        let all_m_one = pts.iter().all(|&p| self.m(p) == 1);
        let arcs_homotopic = component
            .iter()
            .filter(|&&e| self.edges[e].is_arc())
            .all(|&e| self.arc_is_boundary_homotopic(e));
        if all_m_one && arcs_homotopic {
            return ComponentClass::Lattice;
        }
        ComponentClass::NotFiniteOverCentre
    }

    // ------------------------------------------------------------ raw image

    pub fn to_raw(&self) -> RawSurface<F> {
        let points = self
            .points
            .iter()
            .map(|p| {
                (
                    p.name.clone(),
                    p.m,
                    p.lambda.clone(),
                    match p.location {
                        Location::Interior => None,
                        Location::Boundary(b) => Some(self.boundaries[b].0.clone()),
                    },
                )
            })
            .collect();
        let boundaries = self
            .boundaries
            .iter()
            .map(|(n, pts)| {
                (
                    n.clone(),
                    pts.iter().map(|&p| self.points[p].name.clone()).collect(),
                )
            })
            .collect();
        let arcs = self
            .edges
            .iter()
            .filter(|e| e.is_arc())
            .map(|e| {
                (
                    e.name.clone(),
                    self.points[e.from].name.clone(),
                    self.points[e.to].name.clone(),
                )
            })
            .collect();
        let mut rotations = BTreeMap::new();
        for (p, rot) in self.rotations.iter().enumerate() {
            if rot.is_empty() {
                continue;
            }
            rotations.insert(
                self.points[p].name.clone(),
                rot.iter().map(|&oe| self.end_token(oe)).collect(),
            );
        }
        let faces = self
            .faces
            .iter()
            .filter(|f| !f.punctures.is_empty() || f.holes > 0 || f.genus > 0)
            .map(|f| {
                (
                    self.end_token(f.sides[0]),
                    f.punctures
                        .iter()
                        .map(|&p| self.points[p].name.clone())
                        .collect(),
                    f.holes,
                    f.genus,
                )
            })
            .collect();
        RawSurface {
            points,
            boundaries,
            arcs,
            rotations,
            faces,
            genus: self.genus,
            boundary_count: self.boundary_count,
        }
    }

    /// Canonical structural key; equal keys mean equal labelled combinatorial
    /// data (used by the flip round-trip check).
    pub fn canonical_key(&self) -> String {
        let raw = self.to_raw();
        let mut s = String::new();
        for (n, m, l, b) in &raw.points {
            s += &format!("p {n} {m} {l} {}\n", b.clone().unwrap_or_default());
        }
        for (n, pts) in &raw.boundaries {
            let mut pts = pts.clone();
            canonical_rotate(&mut pts, |x| x.clone());
            s += &format!("b {n} {}\n", pts.join(","));
        }
        for (n, f, t) in &raw.arcs {
            s += &format!("a {n} {f} {t}\n");
        }
        for (p, rot) in &raw.rotations {
            s += &format!("r {p} {}\n", rot.join(","));
        }
        let mut faces: Vec<String> = self
            .faces
            .iter()
            .map(|f| {
                format!(
                    "f {} | {} | {} {}",
                    f.sides
                        .iter()
                        .map(|&oe| self.end_token(oe))
                        .collect::<Vec<_>>()
                        .join(","),
                    f.punctures
                        .iter()
                        .map(|&p| self.points[p].name.clone())
                        .collect::<Vec<_>>()
                        .join(","),
                    f.holes,
                    f.genus
                )
            })
            .collect();
        faces.sort();
        s += &faces.join("\n");
        s += &format!("\ng {} bc {}", self.genus, self.boundary_count);
        s
    }

    pub fn set_lambdas(&mut self, lambdas: Vec<F>) {
        assert_eq!(lambdas.len(), self.points.len());
        for (p, l) in self.points.iter_mut().zip(lambdas) {
            p.lambda = l;
        }
    }
}

pub fn canonical_rotate<T: Clone, K: Ord>(cycle: &mut Vec<T>, key: impl Fn(&T) -> K) {
    if cycle.is_empty() {
        return;
    }
    let best = (0..cycle.len())
        .min_by_key(|&i| key(&cycle[i]))
        .unwrap();
    cycle.rotate_left(best);
}

pub fn end_token(edges: &[Edge], oe: OrientedEdge) -> String {
    let sign = if oe.forward { '+' } else { '-' };
    format!("{}{}", edges[oe.edge].name, sign)
}

pub fn parse_end_token(token: &str, edge_ix: &HashMap<String, EdgeIx>) -> Option<OrientedEdge> {
    let (name, sign) = token.split_at(token.len().checked_sub(1)?);
    let forward = match sign {
        "+" => true,
        "-" => false,
        _ => return None,
    };
    Some(OrientedEdge {
        edge: *edge_ix.get(name)?,
        forward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rat;
    use crate::fixtures;

    fn s(raw: &RawSurface<Rat>) -> Surface<Rat> {
        Surface::from_raw(raw).expect("fixture is valid")
    }

    fn tokens(surface: &Surface<Rat>, sides: &[OrientedEdge]) -> Vec<String> {
        sides.iter().map(|&oe| surface.end_token(oe)).collect()
    }

    #[test]
    fn t1_validates_and_traces_the_expected_polygons() {
        let t1 = s(&fixtures::t1());
        assert_eq!(t1.faces.len(), 2);
        // face S has sides u, w, v, -v where u is the clockwise boundary
        // edge from A to B.
        let v = OrientedEdge::fwd(t1.edge_index("v").unwrap());
        let (_, sides) = t1.face_at(v);
        assert_eq!(sides.len(), 4);
        let toks = tokens(&t1, &sides);
        assert!(toks.contains(&"v+".to_string()) && toks.contains(&"v-".to_string()));
        assert!(toks.contains(&"w+".to_string()));
        assert!(toks.contains(&"bnd:o:2-".to_string()));
        // face Q has sides -w, x, y (the other two clockwise boundary edges)
        let w = OrientedEdge::bwd(t1.edge_index("w").unwrap());
        let (_, q_sides) = t1.face_at(w);
        assert_eq!(
            tokens(&t1, &q_sides).into_iter().collect::<BTreeSet<_>>(),
            ["w-", "bnd:o:1-", "bnd:o:0-"]
                .into_iter()
                .map(String::from)
                .collect()
        );
        for f in &t1.faces {
            assert_eq!(f.content(), Content::EmptyDisk);
            assert!(t1.face_satisfies_polygon_conditions(&f.sides));
        }
    }

    #[test]
    fn t1_with_zero_coefficient_is_rejected() {
        let mut raw = fixtures::t1();
        raw.points[3].2 = Rat::from_integer(0.into());
        let err = Surface::from_raw(&raw).unwrap_err();
        match err {
            Error::Validation(v) => {
                assert!(v.iter().any(|x| matches!(x, Violation::ZeroCoefficient(_))))
            }
            _ => panic!("wrong error"),
        }
    }

    #[test]
    fn sphere_with_three_points_needs_higher_multiplicities() {
        let mut raw = fixtures::sphere3();
        raw.points[0].1 = 1; // m_A = 1 violates the hypothesis
        let err = Surface::from_raw(&raw).unwrap_err();
        match err {
            Error::Validation(v) => assert!(v
                .iter()
                .any(|x| matches!(x, Violation::HypothesisViolated(_)))),
            _ => panic!("wrong error"),
        }
    }

    #[test]
    fn t2_has_a_punctured_monogon_and_a_big_monogon() {
        let t2 = s(&fixtures::t2(3, 1));
        let u = OrientedEdge::fwd(t2.edge_index("u").unwrap());
        let (fi, sides) = t2.minimal_polygon(u).unwrap();
        assert_eq!(sides.len(), 1);
        let n = t2.point_index("N").unwrap();
        assert_eq!(t2.faces[fi].content(), Content::OnePuncture(n));
        let (fj, _) = t2.minimal_polygon(u.rev()).unwrap();
        assert_eq!(t2.faces[fj].content(), Content::Big);
        // m_N = 1 makes the loop a special monogon without radius
        let sl = t2.special_loop(u).expect("special monogon");
        assert_eq!(sl.puncture, n);
        assert!(sl.radius.is_none());
    }

    #[test]
    fn ccw_boundary_edges_bound_no_polygon() {
        let t1 = s(&fixtures::t1());
        let b = OrientedEdge::fwd(t1.edge_index("bnd:o:0").unwrap());
        assert!(matches!(
            t1.minimal_polygon(b),
            Err(Error::CcwBoundaryEdge)
        ));
    }

    #[test]
    fn face_partition_counts_arcs_and_clockwise_boundary_edges() {
        for (_, raw) in fixtures::suite() {
            let surf = s(&raw);
            let total: usize = surf.faces.iter().map(|f| f.sides.len()).sum();
            let arcs = surf.arc_indices().len();
            let bnd = surf.edges.len() - arcs;
            assert_eq!(total, 2 * arcs + bnd);
            for f in &surf.faces {
                assert!(surf.face_satisfies_polygon_conditions(&f.sides));
            }
        }
    }

    #[test]
    fn tetrahedral_sphere_has_four_empty_triangles() {
        let t4 = s(&fixtures::t4());
        assert_eq!(t4.faces.len(), 4);
        assert!(t4.is_triangulation());
        assert!(t4
            .faces
            .iter()
            .all(|f| f.sides.len() == 3 && f.content() == Content::EmptyDisk));
    }

    #[test]
    fn u_plus_examples() {
        // triangle on punctures: (M->N)+ is the arc M->P
        let t3 = s(&fixtures::t3(1));
        let a = OrientedEdge::fwd(t3.edge_index("a").unwrap());
        let c = t3.edge_index("c").unwrap();
        assert_eq!(t3.u_plus(a), UPlus::Next(OrientedEdge::bwd(c)));
        for e in t3.arc_indices() {
            assert!(!t3.is_close_to_boundary(e));
        }
        // a pendant-only loop has no follower
        let t2 = s(&fixtures::t2(2, 2));
        let u = OrientedEdge::fwd(t2.edge_index("u").unwrap());
        assert_eq!(t2.u_plus(u), UPlus::Empty);
        assert!(!t2.is_close_to_boundary(u.edge));
        // T1: the arc v has boundary neighbours
        let t1 = s(&fixtures::t1());
        assert!(t1.is_close_to_boundary(t1.edge_index("v").unwrap()));
        assert!(t1.is_close_to_boundary(t1.edge_index("w").unwrap()));
    }

    #[test]
    fn sparse_examples() {
        let t5 = s(&fixtures::bga_loop());
        assert!(t5.is_sparse());
        let t4 = s(&fixtures::t4());
        assert!(!t4.is_sparse()); // empty triangles everywhere
        // monogon around multiplicity two: sparse over Q, not over F_2
        let over_q = s(&fixtures::monogon_m2_rat());
        assert!(over_q.is_sparse());
        let over_f2 =
            Surface::from_raw(&fixtures::monogon_m2_fp2()).expect("valid F_2 fixture");
        assert!(!over_f2.is_sparse());
    }

    #[test]
    fn classification_examples() {
        let t2 = s(&fixtures::t2(2, 2));
        for comp in t2.components() {
            assert_eq!(t2.classify_component(&comp), ComponentClass::FiniteRank);
        }
        let t3 = s(&fixtures::t3(1));
        for comp in t3.components() {
            assert_eq!(t3.classify_component(&comp), ComponentClass::FiniteRank);
        }
        let poly = s(&fixtures::polygon());
        for comp in poly.components() {
            assert_eq!(poly.classify_component(&comp), ComponentClass::Lattice);
        }
        let pp = s(&fixtures::polygon_punctured());
        for comp in pp.components() {
            assert_eq!(pp.classify_component(&comp), ComponentClass::Lattice);
        }
        let fan = s(&fixtures::fan());
        for comp in fan.components() {
            assert_eq!(fan.classify_component(&comp), ComponentClass::Lattice);
        }
        let ap = s(&fixtures::annulus_punctured());
        let comps = ap.components();
        assert!(comps
            .iter()
            .any(|c| ap.classify_component(c) == ComponentClass::NotFiniteOverCentre));
    }

    #[test]
    fn whole_suite_validates() {
        for (name, raw) in fixtures::suite() {
            match Surface::from_raw(&raw) {
                Ok(_) => {}
                Err(e) => panic!("fixture {name} invalid: {e}"),
            }
        }
    }

    #[test]
    fn two_special_detection() {
        // loop around two multiplicity-one punctures
        let raw = RawSurface::<Rat> {
            points: vec![
                ("B".into(), 1, Rat::from_integer(1.into()), None),
                ("M".into(), 1, Rat::from_integer(2.into()), None),
                ("N".into(), 1, Rat::from_integer(3.into()), None),
            ],
            boundaries: vec![],
            arcs: vec![("x".into(), "B".into(), "B".into())],
            rotations: [(
                "B".to_string(),
                vec!["x+".to_string(), "x-".to_string()],
            )]
            .into_iter()
            .collect(),
            faces: vec![
                ("x+".into(), vec!["M".into(), "N".into()], 0, 0),
                ("x-".into(), vec![], 1, 0),
            ],
            genus: 0,
            boundary_count: 1,
        };
        let surf = s(&raw);
        let x = OrientedEdge::fwd(surf.edge_index("x").unwrap());
        assert!(surf.two_special(x).is_some());
        assert!(surf.two_special(x.rev()).is_none());
    }
}
