//! Quivers and defining relations of the algebra of a partial triangulation.
//!
//! The quiver has one vertex per edge of the triangulation and, for each
//! oriented edge, one arrow to its counter-clockwise successor around the
//! starting point. Paths are stored run-length encoded as winding segments
//! `(start, steps)`, so a winding with many full turns stays O(1).
//!
//! Relations come in two styles. The canonical one used by the
//! multiplication engine resolves every length-two turn through an arc into
//! a tail determined by the minimal polygon of that arc (the `f°` table);
//! the alternative style trades the central-element tails for a shorter
//! list. For triangulations both are compared against the cyclic
//! derivatives of the potential.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::surface::{Content, EdgeIx, OrientedEdge, Surface};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One winding segment: `steps` consecutive arrows pivoting around
/// `s(start)`. Zero steps is the idempotent at the start edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Seg {
    pub start: OrientedEdge,
    pub steps: u64,
}

impl Seg {
    pub fn idem(oe: OrientedEdge) -> Seg {
        Seg {
            start: oe,
            steps: 0,
        }
    }
}

/// A composable sequence of winding segments, possibly with central factors
/// `e C` attached (tracked as a count since `C` is central and squares to
/// zero).
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct FormalPath {
    pub c_factors: u8,
    pub segs: Vec<Seg>,
}

impl FormalPath {
    pub fn from_segs(segs: Vec<Seg>) -> Self {
        FormalPath {
            c_factors: 0,
            segs,
        }
    }

    pub fn idem(oe: OrientedEdge) -> Self {
        FormalPath::from_segs(vec![Seg::idem(oe)])
    }

    pub fn central(oe: OrientedEdge) -> Self {
        FormalPath {
            c_factors: 1,
            segs: vec![Seg::idem(oe)],
        }
    }

    /// Merge adjacent segments that continue the same winding and drop
    /// no-op idempotents: a purely formal normal form, no relations applied.
    pub fn rle<F: Field>(&self, s: &Surface<F>) -> FormalPath {
        let mut segs: Vec<Seg> = Vec::new();
        for &seg in &self.segs {
            if seg.steps == 0 && !segs.is_empty() {
                continue;
            }
            match segs.last_mut() {
                Some(last) if last.steps > 0 && seg.steps > 0 => {
                    let arrive = s.target_of(last.start, last.steps);
                    if arrive == seg.start {
                        last.steps += seg.steps;
                        continue;
                    }
                    segs.push(seg);
                }
                Some(last) if last.steps == 0 && seg.steps > 0 => {
                    *last = seg;
                }
                _ => segs.push(seg),
            }
        }
        FormalPath {
            c_factors: self.c_factors,
            segs,
        }
    }
}

/// Finite linear combination of formal paths.
#[derive(Clone, Debug)]
pub struct PathCombination<F> {
    pub terms: Vec<(F, FormalPath)>,
}

impl<F: Field> PathCombination<F> {
    pub fn zero() -> Self {
        PathCombination { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Formal normal form: RLE every path and collect equal paths.
    pub fn formal_nf(&self, s: &Surface<F>) -> PathCombination<F> {
        let mut map: BTreeMap<FormalPath, F> = BTreeMap::new();
        for (c, p) in &self.terms {
            let key = p.rle(s);
            let entry = map.entry(key).or_insert_with(F::zero);
            *entry = entry.clone() + c.clone();
        }
        PathCombination {
            terms: map
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(p, c)| (c, p))
                .collect(),
        }
    }
}

/// Tail of the canonical relation attached to an oriented arc: the head
/// `ic(u,-v) ic(v,-w)` equals this in the algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FCirc<F> {
    Zero,
    /// scalar times a winding segment (steps may be zero: a scalar idempotent)
    Wind(F, Seg),
    /// scalar times `e_u C`
    Cent(F, EdgeIx),
}

#[derive(Clone, Debug)]
pub struct Relation<F> {
    /// The oriented arc the relation is attached to.
    pub arc: OrientedEdge,
    pub combination: PathCombination<F>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Style {
    Alt0,
    Alt2,
    Jacobian,
}

#[derive(Clone, Debug)]
pub struct Presentation<F> {
    pub style: Style,
    /// Vertices of the arc quiver, by edge index.
    pub vertices: Vec<EdgeIx>,
    pub relations: Vec<Relation<F>>,
    /// The ideal also contains J C (the arrow ideal times the central sum).
    pub ideal_note: &'static str,
}

impl<F: Field> Surface<F> {
    /// Position reached from `start` after `steps` counter-clockwise arrows.
    pub fn target_of(&self, start: OrientedEdge, steps: u64) -> OrientedEdge {
        let (p, i) = self.position(start);
        let rot = self.rotation_at(p);
        rot[(i + (steps % rot.len() as u64) as usize) % rot.len()]
    }

    /// Counter-clockwise arrow count from `from` to `to` around the common
    /// point; zero when equal.
    pub fn dist(&self, from: OrientedEdge, to: OrientedEdge) -> u64 {
        let (p, i) = self.position(from);
        let (q, j) = self.position(to);
        assert_eq!(p, q, "dist requires a common pivot");
        let n = self.rotation_at(p).len();
        ((j + n - i) % n) as u64
    }

    /// Does the winding visit a boundary-edge position (including both ends)?
    pub fn winding_hits_boundary(&self, start: OrientedEdge, steps: u64) -> bool {
        let (p, i) = self.position(start);
        let rot = self.rotation_at(p);
        let n = rot.len() as u64;
        let span = steps.min(n) as usize;
        for k in 0..=span {
            if self.is_boundary_edge(rot[(i + k) % rot.len()].edge) {
                return true;
            }
        }
        if steps >= n {
            // a full turn visits everything
            rot.iter().any(|oe| self.is_boundary_edge(oe.edge))
        } else {
            false
        }
    }

    /// The external winding io(a, b): the scalar is lambda of the pivot, the
    /// segment makes m-1 full turns and then winds from a to b.
    pub fn io(&self, a: OrientedEdge, b: OrientedEdge) -> (F, Seg) {
        let p = self.s(a);
        let full = self.full_degree(p);
        let steps = (self.m(p) - 1) * full + self.dist(a, b);
        (
            self.lambda(p),
            Seg {
                start: a,
                steps,
            },
        )
    }
}

/// Arrows of the full quiver: one per oriented edge, to its successor.
pub fn quiver_arrows<F: Field>(s: &Surface<F>) -> Vec<(OrientedEdge, OrientedEdge)> {
    let mut arrows = Vec::new();
    for e in 0..s.edges.len() {
        for oe in [OrientedEdge::fwd(e), OrientedEdge::bwd(e)] {
            arrows.push((oe, s.succ(oe)));
        }
    }
    arrows.sort_by_key(|(a, _)| s.end_token(*a));
    arrows
}

/// Arrows of the arc quiver: both endpoints are arcs.
pub fn arc_quiver_arrows<F: Field>(s: &Surface<F>) -> Vec<(OrientedEdge, OrientedEdge)> {
    quiver_arrows(s)
        .into_iter()
        .filter(|(a, b)| !s.is_boundary_edge(a.edge) && !s.is_boundary_edge(b.edge))
        .collect()
}

/// The tail of the canonical relation for the oriented arc `v`, read off
/// the minimal polygon (= traced face) containing it. `None` when the head
/// itself passes through a boundary vertex and no relation is needed.
pub fn f_circ<F: Field>(s: &Surface<F>, v: OrientedEdge) -> Option<FCirc<F>> {
    assert!(!s.is_boundary_edge(v.edge));
    let (fi, sides) = s.face_at(v);
    let n = sides.len();
    let u = sides[1 % n];
    let w = sides[n - 1];
    if s.is_boundary_edge(u.edge) || s.is_boundary_edge(w.edge) {
        return None;
    }
    let content = s.faces[fi].content();
    let fc = match content {
        Content::Big => FCirc::Zero,
        Content::OnePuncture(mp) => {
            let m = s.m(mp);
            match n {
                1 => {
                    if m == 1 {
                        FCirc::Wind(
                            s.lambda(mp),
                            Seg {
                                start: v,
                                steps: s.dist(v, v.rev()),
                            },
                        )
                    } else if m == 2 {
                        FCirc::Cent(s.lambda(mp), v.edge)
                    } else {
                        FCirc::Zero
                    }
                }
                2 => {
                    if m == 1 {
                        FCirc::Cent(s.lambda(mp), u.edge)
                    } else {
                        FCirc::Zero
                    }
                }
                3 => {
                    // A self-folded triangle around a puncture.
                    if sides[2] == u.rev() && m == 1 && s.m(s.t(u)) == 1 {
                        FCirc::Cent(s.lambda(mp) * s.lambda(s.t(u)), u.edge)
                    } else {
                        FCirc::Zero
                    }
                }
                _ => FCirc::Zero,
            }
        }
        Content::EmptyDisk => match n {
            3 => {
                let (sc, seg) = s.io(u.rev(), w);
                FCirc::Wind(sc, seg)
            }
            4 => {
                if sides[2] == u.rev() {
                    if s.m(s.t(u)) == 1 {
                        let (sc, seg) = s.io(u, sides[3]);
                        FCirc::Wind(s.lambda(s.t(u)) * sc, seg)
                    } else {
                        FCirc::Zero
                    }
                } else if sides[3] == sides[2].rev() {
                    if s.m(s.t(sides[2])) == 1 {
                        let (sc, seg) = s.io(u.rev(), sides[2]);
                        FCirc::Wind(s.lambda(s.t(sides[2])) * sc, seg)
                    } else {
                        FCirc::Zero
                    }
                } else {
                    FCirc::Zero
                }
            }
            5 => {
                if sides[2] == u.rev() && sides[4] == sides[3].rev() {
                    if s.m(s.t(u)) == 1 && s.m(s.t(sides[3])) == 1 {
                        let (sc, seg) = s.io(u, sides[3]);
                        FCirc::Wind(s.lambda(s.t(u)) * s.lambda(s.t(sides[3])) * sc, seg)
                    } else {
                        FCirc::Zero
                    }
                } else {
                    FCirc::Zero
                }
            }
            _ => FCirc::Zero,
        },
    };
    Some(fc)
}

/// The two-term relation `C_v`, with windings through the boundary dropped.
pub fn relation_c<F: Field>(s: &Surface<F>, v: OrientedEdge) -> PathCombination<F> {
    assert!(!s.is_boundary_edge(v.edge));
    let mut terms = Vec::new();
    let sp = s.s(v);
    let steps_s = s.m(sp) * s.full_degree(sp);
    if !s.winding_hits_boundary(v, steps_s) {
        terms.push((
            s.lambda(sp),
            FormalPath::from_segs(vec![Seg {
                start: v,
                steps: steps_s,
            }]),
        ));
    }
    let tp = s.t(v);
    let steps_t = s.m(tp) * s.full_degree(tp);
    if !s.winding_hits_boundary(v.rev(), steps_t) {
        terms.push((
            -s.lambda(tp),
            FormalPath::from_segs(vec![Seg {
                start: v.rev(),
                steps: steps_t,
            }]),
        ));
    }
    PathCombination { terms }
}

fn head<F: Field>(s: &Surface<F>, v: OrientedEdge) -> FormalPath {
    let u = s.pred(v.rev());
    FormalPath::from_segs(vec![
        Seg {
            start: u,
            steps: 1,
        },
        Seg {
            start: v,
            steps: 1,
        },
    ])
}

pub fn relations_alt0<F: Field>(s: &Surface<F>) -> Presentation<F> {
    let mut relations = Vec::new();
    let mut arcs = s.oriented_arcs();
    arcs.sort_by_key(|&oe| s.end_token(oe));
    for v in arcs {
        let mut terms = Vec::new();
        match f_circ(s, v) {
            None => {}
            Some(fc) => {
                terms.push((F::one(), head(s, v)));
                match fc {
                    FCirc::Zero => {}
                    FCirc::Wind(sc, seg) => {
                        terms.push((-sc, FormalPath::from_segs(vec![seg])))
                    }
                    FCirc::Cent(sc, u) => {
                        terms
                            .push((-sc, FormalPath::central(OrientedEdge::fwd(u))))
                    }
                }
            }
        }
        relations.push(Relation {
            arc: v,
            combination: PathCombination { terms },
        });
    }
    for v in s.arc_indices() {
        relations.push(Relation {
            arc: OrientedEdge::fwd(v),
            combination: relation_c(s, OrientedEdge::fwd(v)),
        });
    }
    Presentation {
        style: Style::Alt0,
        vertices: s.arc_indices(),
        relations,
        ideal_note: "the ideal also contains J*C",
    }
}

pub fn relations_alt2<F: Field>(s: &Surface<F>) -> Presentation<F> {
    let mut relations = Vec::new();
    let mut arcs = s.oriented_arcs();
    arcs.sort_by_key(|&oe| s.end_token(oe));
    for v in arcs {
        let (fi, sides) = s.face_at(v);
        let n = sides.len();
        let u = sides[1 % n];
        let w = sides[n - 1];
        let mut terms = Vec::new();
        if !s.is_boundary_edge(u.edge) && !s.is_boundary_edge(w.edge) {
            terms.push((F::one(), head(s, v)));
            match s.faces[fi].content() {
                Content::EmptyDisk if n == 3 => {
                    let (sc, seg) = s.io(u.rev(), w);
                    terms.push((-sc, FormalPath::from_segs(vec![seg])));
                }
                Content::OnePuncture(mp) if n == 1 && s.m(mp) == 1 => {
                    terms.push((
                        -s.lambda(mp),
                        FormalPath::from_segs(vec![Seg {
                            start: v,
                            steps: s.dist(v, v.rev()),
                        }]),
                    ));
                }
                Content::OnePuncture(mp)
                    if n == 1 && s.m(mp) == 2 && s.char_is_two() =>
                {
                    let sp = s.s(v);
                    terms.push((
                        -(s.lambda(mp) * s.lambda(sp)),
                        FormalPath::from_segs(vec![Seg {
                            start: v,
                            steps: s.m(sp) * s.full_degree(sp),
                        }]),
                    ));
                }
                _ => {}
            }
        }
        relations.push(Relation {
            arc: v,
            combination: PathCombination { terms },
        });
    }
    for v in s.arc_indices() {
        relations.push(Relation {
            arc: OrientedEdge::fwd(v),
            combination: relation_c(s, OrientedEdge::fwd(v)),
        });
    }
    Presentation {
        style: Style::Alt2,
        vertices: s.arc_indices(),
        relations,
        ideal_note: "the ideal also contains J*C",
    }
}

/// Membership in the arrow ideal J for a winding.
pub fn is_in_j<F: Field>(s: &Surface<F>, start: OrientedEdge, steps: u64) -> bool {
    if steps == 0 {
        return false;
    }
    let p = s.s(start);
    let full = s.full_degree(p);
    if steps >= full {
        return true;
    }
    let target = s.target_of(start, steps);
    for sl in s.special_loops() {
        if s.s(sl.side) != p {
            continue;
        }
        // ic(u', -u')
        if start == sl.side && target == sl.side.rev() {
            return false;
        }
        if let Some(r) = sl.radius {
            let rad = if s.s(OrientedEdge::fwd(r)) == p {
                OrientedEdge::fwd(r)
            } else {
                OrientedEdge::bwd(r)
            };
            // ic(u', v') and ic(v', -u')
            if start == sl.side && target == rad {
                return false;
            }
            if start == rad && target == sl.side.rev() {
                return false;
            }
        }
    }
    true
}

// --------------------------------------------------------------- potential

/// A cyclic word of arrows together with a coefficient.
#[derive(Clone, Debug)]
pub struct PotentialTerm<F> {
    pub coefficient: F,
    /// Arrow starts in order; the word is read cyclically.
    pub word: Vec<OrientedEdge>,
}

#[derive(Clone, Debug)]
pub struct Potential<F> {
    pub terms: Vec<PotentialTerm<F>>,
    /// Arrows between boundary edges winding around a hole.
    pub frozen: Vec<OrientedEdge>,
}

pub fn potential<F: Field>(s: &Surface<F>) -> Result<Potential<F>> {
    if !s.is_triangulation() {
        return Err(Error::NotATriangulation(
            "the potential needs every face to be an empty triangle".into(),
        ));
    }
    for (p, _) in s.points.iter().enumerate() {
        let m = s.m(p);
        let one = s.lambda(p).int_like(1);
        let mut acc = F::zero();
        for _ in 0..m {
            acc = acc + one.clone();
        }
        if acc.inv().is_none() {
            return Err(Error::MultiplicityNotInvertible(s.points[p].name.clone()));
        }
    }
    let mut terms = Vec::new();
    for f in &s.faces {
        // omega_3 omega_2 omega_1 with omega_i = ic(s_i, -s_{i-1})
        let word = vec![f.sides[2], f.sides[1], f.sides[0]];
        terms.push(PotentialTerm {
            coefficient: F::one(),
            word,
        });
    }
    for p in 0..s.points.len() {
        if s.rotation_at(p).is_empty() {
            continue;
        }
        let m = s.m(p);
        let lam = s.lambda(p);
        let m_scalar = {
            let one = lam.int_like(1);
            let mut acc = F::zero();
            for _ in 0..m {
                acc = acc + one.clone();
            }
            acc
        };
        let coefficient = -(lam * m_scalar.inv().unwrap());
        let rot = s.rotation_at(p).to_vec();
        let mut word = Vec::new();
        for _ in 0..m {
            word.extend(rot.iter().copied());
        }
        terms.push(PotentialTerm { coefficient, word });
    }
    let frozen = quiver_arrows(s)
        .into_iter()
        .filter(|(a, b)| s.is_boundary_edge(a.edge) && s.is_boundary_edge(b.edge))
        .map(|(a, _)| a)
        .collect();
    Ok(Potential { terms, frozen })
}

/// Cyclic derivative of the potential with respect to the arrow starting at
/// `alpha`.
pub fn cyclic_derivative<F: Field>(
    s: &Surface<F>,
    w: &Potential<F>,
    alpha: OrientedEdge,
) -> PathCombination<F> {
    let mut terms = Vec::new();
    for t in &w.terms {
        for (i, &a) in t.word.iter().enumerate() {
            if a == alpha {
                let mut segs = Vec::new();
                let n = t.word.len();
                for k in 1..n {
                    segs.push(Seg {
                        start: t.word[(i + k) % n],
                        steps: 1,
                    });
                }
                if segs.is_empty() {
                    segs.push(Seg::idem(s.succ(alpha)));
                }
                terms.push((t.coefficient.clone(), FormalPath::from_segs(segs)));
            }
        }
    }
    PathCombination { terms }.formal_nf(s)
}

/// Jacobian relations of the arc quiver: one cyclic derivative per
/// non-frozen arrow between arcs.
pub fn jacobian_relations<F: Field>(s: &Surface<F>) -> Result<Presentation<F>> {
    let w = potential(s)?;
    let mut relations = Vec::new();
    for (a, _) in arc_quiver_arrows(s) {
        relations.push(Relation {
            arc: a,
            combination: cyclic_derivative(s, &w, a),
        });
    }
    Ok(Presentation {
        style: Style::Jacobian,
        vertices: s.arc_indices(),
        relations,
        ideal_note: "Jacobian ideal of the potential",
    })
}

// ------------------------------------------------------------ pretty print

pub fn seg_text<F: Field>(s: &Surface<F>, seg: &Seg) -> String {
    if seg.steps == 0 {
        return format!("e_{}", s.edges[seg.start.edge].name);
    }
    let p = s.s(seg.start);
    let full = s.full_degree(p);
    let turns = (seg.steps - 1) / full;
    let _rest = seg.steps - turns * full;
    let target = s.target_of(seg.start, seg.steps);
    let from = s.end_token(seg.start);
    if turns == 0 {
        format!("ic({},{})", from, s.end_token(target))
    } else {
        format!(
            "ic({},{})^{}.ic({},{})",
            from,
            from,
            turns,
            from,
            s.end_token(target)
        )
    }
}

pub fn path_text<F: Field>(s: &Surface<F>, p: &FormalPath) -> String {
    let mut out = String::new();
    if p.c_factors > 0 {
        out.push_str("C.");
    }
    let parts: Vec<String> = p.segs.iter().map(|seg| seg_text(s, seg)).collect();
    out.push_str(&parts.join("."));
    out
}

pub fn combination_text<F: Field>(s: &Surface<F>, c: &PathCombination<F>) -> String {
    if c.terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (sc, p)) in c.terms.iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        let _ = write!(out, "({sc})*{}", path_text(s, p));
    }
    out
}

pub fn presentation_text<F: Field>(s: &Surface<F>, p: &Presentation<F>) -> String {
    let mut out = String::new();
    let style = match p.style {
        Style::Alt0 => "alt0",
        Style::Alt2 => "alt2",
        Style::Jacobian => "jacobian",
    };
    let _ = writeln!(out, "style {style}");
    let verts: Vec<String> = p
        .vertices
        .iter()
        .map(|&v| s.edges[v].name.clone())
        .collect();
    let _ = writeln!(out, "vertices {}", verts.join(" "));
    let arrows = arc_quiver_arrows(s);
    let _ = writeln!(out, "arrows {}", arrows.len());
    for (a, b) in arrows {
        let _ = writeln!(out, "  ic({},{})", s.end_token(a), s.end_token(b));
    }
    for r in &p.relations {
        let _ = writeln!(
            out,
            "R[{}] = {}",
            s.end_token(r.arc),
            combination_text(s, &r.combination)
        );
    }
    let _ = writeln!(out, "note: {}", p.ideal_note);
    out
}
