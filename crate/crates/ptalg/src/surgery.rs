//! Combinatorial surgery on partial triangulations: flips (Kauer moves),
//! coefficient mutation, orientation reversal, augmentation, arc removal
//! and the realization of a ribbon graph on a closed-up surface.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::surface::{
    Content, Edge, EdgeKind, Face, Location, MarkedPoint, OrientedEdge,
    RawSurface, Surface, UPlus,
};
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::surface::{EdgeIx, PointIx};

/// A ribbon graph with multiplicities and coefficients: the input side of
/// the Brauer-graph realization.
#[derive(Clone, Debug)]
pub struct RibbonGraph<F> {
    /// name, multiplicity, coefficient
    pub vertices: Vec<(String, u64, F)>,
    /// name, from, to
    pub edges: Vec<(String, String, String)>,
    /// vertex -> ccw cyclic list of tokens "edge+"/"edge-"
    pub rotations: BTreeMap<String, Vec<String>>,
}

struct Parts<F> {
    points: Vec<MarkedPoint<F>>,
    boundaries: Vec<(String, Vec<PointIx>)>,
    edges: Vec<Edge>,
    rotations: Vec<Vec<OrientedEdge>>,
    genus: u64,
    boundary_count: u64,
}

impl<F: Field> Surface<F> {
    fn parts(&self) -> Parts<F> {
        Parts {
            points: self.points.clone(),
            boundaries: self.boundaries.clone(),
            edges: self.edges.clone(),
            rotations: self.rotations.clone(),
            genus: self.genus,
            boundary_count: self.boundary_count,
        }
    }

    /// Rebuild a surface from edited parts, retracing all faces with empty
    /// contents; the caller reassigns contents and must call
    /// `finish_contents` to re-canonicalize.
    fn assemble(parts: Parts<F>) -> Result<Surface<F>> {
        let raw = RawSurface {
            points: parts
                .points
                .iter()
                .map(|p| {
                    (
                        p.name.clone(),
                        p.m,
                        p.lambda.clone(),
                        match p.location {
                            Location::Interior => None,
                            Location::Boundary(b) => Some(parts.boundaries[b].0.clone()),
                        },
                    )
                })
                .collect(),
            boundaries: parts
                .boundaries
                .iter()
                .map(|(n, pts)| {
                    (
                        n.clone(),
                        pts.iter()
                            .map(|&p| parts.points[p].name.clone())
                            .collect(),
                    )
                })
                .collect(),
            arcs: parts
                .edges
                .iter()
                .filter(|e| e.is_arc())
                .map(|e| {
                    (
                        e.name.clone(),
                        parts.points[e.from].name.clone(),
                        parts.points[e.to].name.clone(),
                    )
                })
                .collect(),
            rotations: {
                let mut m = BTreeMap::new();
                for (p, rot) in parts.rotations.iter().enumerate() {
                    if !rot.is_empty() {
                        m.insert(
                            parts.points[p].name.clone(),
                            rot.iter()
                                .map(|&oe| crate::surface::end_token(&parts.edges, oe))
                                .collect(),
                        );
                    }
                }
                m
            },
            faces: Vec::new(),
            genus: parts.genus,
            boundary_count: parts.boundary_count,
        };
        // Face contents are assigned afterwards, so build structurally and
        // ignore hypothesis-level violations here.
        let (surface, _violations) = Surface::build(&raw)?;
        Ok(surface)
    }

    fn set_face_content(
        &mut self,
        side: OrientedEdge,
        punctures: BTreeSet<PointIx>,
        holes: u64,
        genus: u64,
    ) {
        let fi = self.face_index_of(side);
        self.faces[fi].punctures = punctures;
        self.faces[fi].holes = holes;
        self.faces[fi].genus = genus;
    }

    fn add_face_content(&mut self, side: OrientedEdge, p: &BTreeSet<PointIx>, h: u64, g: u64) {
        let fi = self.face_index_of(side);
        self.faces[fi].punctures.extend(p.iter().copied());
        self.faces[fi].holes += h;
        self.faces[fi].genus += g;
    }

    /// Carry face contents over from `self` for every face of `new` whose
    /// side cycle also occurs in `self`. Returns the old faces not carried.
    fn carry_matching_faces(&self, new: &mut Surface<F>) -> Vec<Face> {
        let mut unmatched = Vec::new();
        let key = |edges: &[Edge], f: &Face| -> Vec<String> {
            f.sides
                .iter()
                .map(|&oe| crate::surface::end_token(edges, oe))
                .collect()
        };
        let mut new_by_key: HashMap<Vec<String>, usize> = HashMap::new();
        for (i, f) in new.faces.iter().enumerate() {
            new_by_key.insert(key(&new.edges, f), i);
        }
        for f in &self.faces {
            match new_by_key.get(&key(&self.edges, f)) {
                Some(&i) => {
                    new.faces[i].punctures = translate_points(self, new, &f.punctures);
                    new.faces[i].holes = f.holes;
                    new.faces[i].genus = f.genus;
                }
                None => unmatched.push(f.clone()),
            }
        }
        unmatched
    }

    // ----------------------------------------------------------------- flip

    /// Flip (Kauer move) of the arc `e`. Returns the new partial
    /// triangulation; coefficients are mutated separately by
    /// [`Surface::mutate_coefficients`].
    pub fn flip(&self, e: EdgeIx) -> Result<(Surface<F>, crate::surface::FlipOutcome)> {
        if !self.edges[e].is_arc() {
            return Err(Error::PreconditionFailed(format!(
                "{} is not an arc",
                self.edges[e].name
            )));
        }
        if self.is_close_to_boundary(e) {
            return Err(Error::CloseToBoundary(self.edges[e].name.clone()));
        }
        let mut outcome = crate::surface::FlipOutcome::default();

        // Flipping the doubled side of a special self-folded triangle is a
        // retagging; the partial triangulation itself does not move.
        for sl in self.special_loops() {
            if sl.radius == Some(e) {
                outcome.note = Some(format!(
                    "arc {} is the radius of a special self-folded triangle; flip is trivial",
                    self.edges[e].name
                ));
                return Ok((self.clone(), outcome));
            }
        }
        // Flipping a loop that encloses a bare special monogon: insert the
        // radius first, flip, then flip the radius away.
        for ori in [OrientedEdge::fwd(e), OrientedEdge::bwd(e)] {
            if let Some(sl) = self.special_loop(ori) {
                if sl.radius.is_none() {
                    let (with_radius, r) = self.insert_radius(ori, sl.puncture)?;
                    let (flipped, _) = with_radius.flip_core(e)?;
                    let r_ix = flipped
                        .edge_index(&with_radius.edges[r].name)
                        .ok_or_else(|| Error::Internal("radius arc lost in flip".into()))?;
                    let (result, _) = flipped.flip_core(r_ix)?;
                    outcome.note = Some(format!(
                        "arc {} enclosed a bare special monogon; the radius was inserted and flipped through",
                        self.edges[e].name
                    ));
                    return Ok((result, outcome));
                }
            }
        }
        let s = self.flip_core(e)?;
        Ok(s)
    }

    fn flip_core(&self, e: EdgeIx) -> Result<(Surface<F>, crate::surface::FlipOutcome)> {
        let fw = OrientedEdge::fwd(e);
        let bw = OrientedEdge::bwd(e);
        let up = self.u_plus(fw);
        let um = self.u_plus(bw);
        for x in [up, um] {
            if let UPlus::Next(n) = x {
                if self.is_boundary_edge(n.edge) {
                    return Err(Error::CloseToBoundary(self.edges[e].name.clone()));
                }
            }
        }

        // Banks of the corridor the new arc runs along.
        let mut hugged: BTreeSet<OrientedEdge> = BTreeSet::new();
        if let UPlus::Next(v) = up {
            hugged.insert(v.rev());
        }
        if let UPlus::Next(w) = um {
            hugged.insert(w.rev());
        }
        if let (UPlus::Next(v), UPlus::Next(w)) = (up, um) {
            if v.edge == w.edge {
                hugged.insert(v);
                hugged.insert(w);
            }
        }

        let dead: BTreeSet<usize> = [self.face_index_of(fw), self.face_index_of(bw)]
            .into_iter()
            .collect();

        // Rewire the rotations.
        let mut parts = self.parts();
        let old_slot_fw = self.position(fw);
        let old_slot_bw = self.position(bw);
        for rot in parts.rotations.iter_mut() {
            rot.retain(|&oe| oe != fw && oe != bw);
        }
        let new_s;
        let new_t;
        match up {
            UPlus::Empty => {
                new_s = self.s(fw);
                let rot = &mut parts.rotations[new_s];
                let at = old_slot_fw.1.min(rot.len());
                rot.insert(at, fw);
            }
            UPlus::Next(v) => {
                new_s = self.t(v);
                let rot = &mut parts.rotations[new_s];
                let at = rot
                    .iter()
                    .position(|&oe| oe == v.rev())
                    .ok_or_else(|| Error::Internal("insertion reference missing".into()))?;
                rot.insert(at + 1, fw);
            }
        }
        match um {
            UPlus::Empty => {
                new_t = self.t(fw);
                let rot = &mut parts.rotations[new_t];
                let at = old_slot_bw.1.min(rot.len());
                rot.insert(at, bw);
            }
            UPlus::Next(w) => {
                new_t = self.t(w);
                let rot = &mut parts.rotations[new_t];
                let at = rot
                    .iter()
                    .position(|&oe| oe == w.rev())
                    .ok_or_else(|| Error::Internal("insertion reference missing".into()))?;
                rot.insert(at + 1, bw);
            }
        }
        parts.edges[e].from = new_s;
        parts.edges[e].to = new_t;

        let mut new = Surface::assemble(parts)?;

        // Contents: faces with unchanged cycles carry over; the rest is the
        // dead/born exchange around the flipped arc.
        let unmatched_old = self.carry_matching_faces(&mut new);
        let born: Vec<OrientedEdge> = {
            let mut anchors = Vec::new();
            for (i, f) in new.faces.iter().enumerate() {
                let carried = self.faces.iter().any(|g| {
                    g.sides
                        .iter()
                        .map(|&oe| self.end_token(oe))
                        .collect::<Vec<_>>()
                        == f.sides
                            .iter()
                            .map(|&oe| new.end_token(oe))
                            .collect::<Vec<_>>()
                });
                if !carried {
                    anchors.push(new.faces[i].sides[0]);
                }
                let _ = i;
            }
            anchors
        };
        for f in &unmatched_old {
            let fi = self
                .faces
                .iter()
                .position(|g| g == f)
                .ok_or_else(|| Error::Internal("face lost".into()))?;
            if !dead.contains(&fi) {
                return Err(Error::UnsupportedCase(format!(
                    "flip of {} disturbed a face away from the arc",
                    self.edges[e].name
                )));
            }
        }

        if born.is_empty() {
            // Identity flip (both neighbours empty); everything matched.
            return Ok((new, crate::surface::FlipOutcome::default()));
        }

        // Distribute content units of the dead faces by their residual banks.
        let mut deferred: Vec<&Face> = Vec::new();
        let mut assigned_to: Vec<(OrientedEdge, &Face)> = Vec::new();
        for f in &unmatched_old {
            if f.punctures.is_empty() && f.holes == 0 && f.genus == 0 {
                continue;
            }
            let residual: Vec<OrientedEdge> = f
                .sides
                .iter()
                .copied()
                .filter(|s| s.edge != e && !hugged.contains(s))
                .collect();
            let mut targets: BTreeSet<String> = BTreeSet::new();
            let mut target_anchor = None;
            for s in &residual {
                let tok = self.end_token(*s);
                let oe = crate::surface::parse_end_token(&tok, &new_edge_map(&new))
                    .ok_or_else(|| Error::Internal("side token lost".into()))?;
                for &b in &born {
                    if new.face_index_of(oe) == new.face_index_of(b) {
                        targets.insert(new.end_token(b));
                        target_anchor = Some(b);
                    }
                }
            }
            match targets.len() {
                0 => deferred.push(f),
                1 => assigned_to.push((target_anchor.unwrap(), f)),
                _ => {
                    return Err(Error::UnsupportedCase(format!(
                        "content of a face at {} is split by the flip in a way no local rule determines",
                        self.edges[e].name
                    )))
                }
            }
        }
        for (anchor, f) in &assigned_to {
            let pts = translate_points(self, &new, &f.punctures);
            new.add_face_content(*anchor, &pts, f.holes, f.genus);
        }
        // A dead face whose every bank is swept (an enclosed monogon) dumps
        // its content on the other side of the new arc.
        for f in deferred {
            let born_faces: BTreeSet<usize> =
                born.iter().map(|&b| new.face_index_of(b)).collect();
            let used: BTreeSet<usize> = assigned_to
                .iter()
                .map(|(a, _)| new.face_index_of(*a))
                .collect();
            let rest: Vec<usize> = born_faces.difference(&used).copied().collect();
            let anchor = match (rest.len(), born_faces.len()) {
                (1, _) => new.faces[rest[0]].sides[0],
                (_, 1) => new.faces[*born_faces.iter().next().unwrap()].sides[0],
                _ => {
                    return Err(Error::UnsupportedCase(format!(
                        "cannot place the enclosed content while flipping {}",
                        self.edges[e].name
                    )))
                }
            };
            let pts = translate_points(self, &new, &f.punctures);
            new.add_face_content(anchor, &pts, f.holes, f.genus);
        }

        let violations = new.validate();
        if !violations.is_empty() {
            return Err(Error::Internal(format!(
                "flip produced an invalid surface: {:?}",
                violations
            )));
        }
        Ok((new, crate::surface::FlipOutcome::default()))
    }

    /// Insert the radius arc of a bare special monogon with side `side`
    /// around puncture `m`.
    pub fn insert_radius(&self, side: OrientedEdge, m: PointIx) -> Result<(Surface<F>, EdgeIx)> {
        let base = self.s(side);
        let mut name = format!("{}.r", self.edges[side.edge].name);
        while self.edge_index(&name).is_some() {
            name.push('r');
        }
        let mut parts = self.parts();
        let new_edge = parts.edges.len();
        parts.edges.push(Edge {
            name: name.clone(),
            from: base,
            to: m,
            kind: EdgeKind::Arc,
        });
        let at = parts.rotations[base]
            .iter()
            .position(|&oe| oe == side)
            .unwrap();
        parts.rotations[base].insert(at + 1, OrientedEdge::fwd(new_edge));
        parts.rotations[m] = vec![OrientedEdge::bwd(new_edge)];
        let mut new = Surface::assemble(parts)?;
        let _ = self.carry_matching_faces(&mut new);
        // The monogon face around `m` became an empty self-folded triangle;
        // all other faces are untouched. Only the old monogon went missing
        // and the triangle starts with empty content, which is correct.
        let violations = new.validate();
        if !violations.is_empty() {
            return Err(Error::Internal(format!(
                "radius insertion produced an invalid surface: {:?}",
                violations
            )));
        }
        let ix = new
            .edge_index(&name)
            .ok_or_else(|| Error::Internal("radius arc lost".into()))?;
        Ok((new, ix))
    }

    /// Coefficient mutation attached to the flip of `e`, computed on `self`.
    pub fn mutate_coefficients(&self, e: EdgeIx) -> Result<Vec<F>> {
        if self.is_close_to_boundary(e) {
            return Err(Error::CloseToBoundary(self.edges[e].name.clone()));
        }
        let mut lambdas: Vec<F> = self.points.iter().map(|p| p.lambda.clone()).collect();

        // A monogon around a unique puncture touched by the flip.
        for x in self.oriented_arcs() {
            if let Some((mp, radius)) = self.enclosing_loop(x) {
                let cond_loop = x.edge == e && radius.is_none() && self.arc_degree(mp) == 0;
                let cond_incident =
                    self.edges[e].from == mp || self.edges[e].to == mp;
                if cond_loop || cond_incident {
                    let nu_inv = self
                        .nu()
                        .inv()
                        .ok_or_else(|| Error::Internal("nu not invertible".into()))?;
                    lambdas[mp] = -lambdas[mp].clone();
                    let b = self.s(x);
                    lambdas[b] = nu_inv * lambdas[b].clone();
                    return Ok(lambdas);
                }
            }
        }

        // Dangling end: (-x)^+ empty while x is not a side of a self-folded
        // triangle.
        for x in [OrientedEdge::fwd(e), OrientedEdge::bwd(e)] {
            if self.u_plus(x.rev()) == UPlus::Empty && !self.side_of_self_folded(x) {
                let t = self.t(x);
                let s = self.s(x);
                lambdas[t] = -lambdas[t].clone();
                if self.m(s) % 2 == 1 {
                    lambdas[s] = -lambdas[s].clone();
                }
            }
        }
        Ok(lambdas)
    }

    /// A loop around a single enclosed puncture, of any multiplicity, with
    /// or without its radius arc.
    pub fn enclosing_loop(&self, side: OrientedEdge) -> Option<(PointIx, Option<EdgeIx>)> {
        if self.is_boundary_edge(side.edge) || self.s(side) != self.t(side) {
            return None;
        }
        let (fi, sides) = self.face_at(side);
        let f = &self.faces[fi];
        match sides.len() {
            1 => match f.content() {
                Content::OnePuncture(mp) => Some((mp, None)),
                _ => None,
            },
            3 => {
                if f.content() != Content::EmptyDisk {
                    return None;
                }
                let r = sides[1];
                if sides[2] != r.rev() || r.edge == side.edge {
                    return None;
                }
                let mp = self.t(r);
                if self.is_interior(mp) && self.full_degree(mp) == 1 && self.s(r) == self.s(side)
                {
                    Some((mp, Some(r.edge)))
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn side_of_self_folded(&self, x: OrientedEdge) -> bool {
        for ori in [x, x.rev()] {
            let (fi, _) = self.face_at(ori);
            let f = &self.faces[fi];
            if f.sides.len() == 3 {
                let edges: Vec<_> = f.sides.iter().map(|s| s.edge).collect();
                if edges[0] == edges[1] || edges[1] == edges[2] || edges[0] == edges[2] {
                    return true;
                }
            }
        }
        false
    }

    // -------------------------------------------------------------- reflect

    /// The mirror surface: all rotations reversed. Flipping there and
    /// mirroring back realizes the inverse flip.
    pub fn reflect(&self) -> Surface<F> {
        let mut parts = self.parts();
        // Reverse boundary orientations; boundary edge k of an n-gon becomes
        // edge n-1-k with swapped direction.
        for (_, pts) in parts.boundaries.iter_mut() {
            pts[1..].reverse();
        }
        let remap = |oe: OrientedEdge| -> OrientedEdge {
            match self.edges[oe.edge].kind {
                EdgeKind::Arc => oe,
                EdgeKind::Boundary { component, index } => {
                    let n = self.boundaries[component].1.len();
                    let other = self
                        .edges
                        .iter()
                        .position(|ed| {
                            ed.kind
                                == EdgeKind::Boundary {
                                    component,
                                    index: (n - 1 - index) % n,
                                }
                        })
                        .unwrap();
                    OrientedEdge {
                        edge: other,
                        forward: !oe.forward,
                    }
                }
            }
        };
        for (b, (_, pts)) in parts.boundaries.iter().enumerate() {
            let n = pts.len();
            for k in 0..n {
                let old = self
                    .edges
                    .iter()
                    .position(|ed| {
                        ed.kind
                            == EdgeKind::Boundary {
                                component: b,
                                index: (n - 1 - k) % n,
                            }
                    })
                    .unwrap();
                let e = &mut parts.edges[old];
                e.from = pts[k];
                e.to = pts[(k + 1) % n];
                e.kind = EdgeKind::Boundary {
                    component: b,
                    index: k,
                };
                e.name = format!("bnd:{}:{}", parts.boundaries[b].0, k);
            }
        }
        for rot in parts.rotations.iter_mut() {
            let mut r: Vec<OrientedEdge> = rot.iter().map(|&oe| remap(oe)).collect();
            r.reverse();
            *rot = r;
        }
        // Boundary edge names were rewritten in place; keep arcs, then
        // assemble (face traces reverse automatically).
        let mut new = Surface::assemble(parts).expect("reflection is structure-preserving");
        // Faces of the mirror are the reversed-and-negated old cycles.
        for f in &self.faces {
            let mut sides: Vec<OrientedEdge> =
                f.sides.iter().map(|&s| remap(s).rev()).collect();
            sides[1..].reverse();
            let anchor = sides[0];
            let pts = translate_points(self, &new, &f.punctures);
            new.set_face_content(anchor, pts, f.holes, f.genus);
        }
        new
    }

    /// Inverse flip: mirror, flip, mirror back.
    pub fn inverse_flip(&self, e: EdgeIx) -> Result<(Surface<F>, crate::surface::FlipOutcome)> {
        let name = self.edges[e].name.clone();
        let mirrored = self.reflect();
        let me = mirrored
            .edge_index(&name)
            .ok_or_else(|| Error::Internal("edge lost in reflection".into()))?;
        let (flipped, outcome) = mirrored.flip(me)?;
        Ok((flipped.reflect(), outcome))
    }

    pub fn inverse_mutate_coefficients(&self, e: EdgeIx) -> Result<Vec<F>> {
        let name = self.edges[e].name.clone();
        let mirrored = self.reflect();
        let me = mirrored
            .edge_index(&name)
            .ok_or_else(|| Error::Internal("edge lost in reflection".into()))?;
        mirrored.mutate_coefficients(me)
    }

    // -------------------------------------------------------------- augment

    /// Patch every marked boundary component with a twice-punctured polygon,
    /// producing a surface without marked boundaries.
    pub fn augment(&self) -> Result<Surface<F>> {
        if self.boundaries.is_empty() {
            return Ok(self.clone());
        }
        let one = self
            .points
            .first()
            .map(|p| p.lambda.int_like(1))
            .unwrap_or_else(F::one);
        let mut raw = self.to_raw();
        let mut patched_faces: Vec<(String, Vec<String>, u64, u64)> = Vec::new();
        let rename = |tok: &str| -> String {
            if let Some(rest) = tok.strip_prefix("bnd:") {
                let mut it = rest.rsplitn(2, ':');
                let tail = it.next().unwrap(); // "k+" or "k-"
                let bname = it.next().unwrap();
                format!("{bname}.e{tail}")
            } else {
                tok.to_string()
            }
        };
        for (bname, pts) in &raw.boundaries.clone() {
            let q1 = format!("{bname}.q1");
            let q2 = format!("{bname}.q2");
            raw.points.push((q1.clone(), 1, one.clone(), None));
            raw.points.push((q2.clone(), 1, one.clone(), None));
            let n = pts.len();
            for k in 0..n {
                raw.arcs.push((
                    format!("{bname}.e{k}"),
                    pts[k].clone(),
                    pts[(k + 1) % n].clone(),
                ));
            }
            // The patched face is the counter-clockwise circle.
            patched_faces.push((format!("{bname}.e0+"), vec![q1, q2], 0, 0));
        }
        for (_, _, _, b) in raw.points.iter_mut() {
            *b = None;
        }
        raw.boundaries.clear();
        for rot in raw.rotations.values_mut() {
            for tok in rot.iter_mut() {
                *tok = rename(tok);
            }
        }
        for (anchor, _, _, _) in raw.faces.iter_mut() {
            *anchor = rename(anchor);
        }
        raw.faces.extend(patched_faces);
        raw.boundary_count = self.boundary_count - self.boundaries.len() as u64;
        Surface::from_raw(&raw)
    }

    // ------------------------------------------------------------- removal

    /// Remove one arc, merging or splitting the adjacent faces.
    pub fn remove_arc(&self, e: EdgeIx) -> Result<Surface<F>> {
        if !self.edges[e].is_arc() {
            return Err(Error::PreconditionFailed("cannot remove a boundary edge".into()));
        }
        let fw = OrientedEdge::fwd(e);
        let bw = OrientedEdge::bwd(e);
        let dead: BTreeSet<usize> = [self.face_index_of(fw), self.face_index_of(bw)]
            .into_iter()
            .collect();
        let mut parts = self.parts();
        for rot in parts.rotations.iter_mut() {
            rot.retain(|&oe| oe != fw && oe != bw);
        }
        let mut isolated: Vec<PointIx> = Vec::new();
        for p in [self.edges[e].from, self.edges[e].to] {
            if parts.rotations[p].is_empty() && !self.rotations[p].is_empty() {
                if !self.is_interior(p) {
                    return Err(Error::Internal("boundary point isolated".into()));
                }
                isolated.push(p);
            }
        }
        isolated.dedup();
        // Drop the edge, remapping indices.
        let remap: Vec<Option<usize>> = {
            let mut v = Vec::with_capacity(parts.edges.len());
            let mut next = 0usize;
            for i in 0..parts.edges.len() {
                if i == e {
                    v.push(None);
                } else {
                    v.push(Some(next));
                    next += 1;
                }
            }
            v
        };
        parts.edges.remove(e);
        for rot in parts.rotations.iter_mut() {
            for oe in rot.iter_mut() {
                oe.edge = remap[oe.edge].unwrap();
            }
        }
        let mut new = Surface::assemble(parts)?;
        let unmatched_old = self.carry_matching_faces(&mut new);
        for f in &unmatched_old {
            let fi = self.faces.iter().position(|g| g == f).unwrap();
            if !dead.contains(&fi) {
                return Err(Error::Internal("removal disturbed a distant face".into()));
            }
        }
        // Born faces: new cycles that match no old face.
        let old_keys: BTreeSet<Vec<String>> = self
            .faces
            .iter()
            .map(|f| f.sides.iter().map(|&oe| self.end_token(oe)).collect())
            .collect();
        let born: Vec<usize> = (0..new.faces.len())
            .filter(|&i| {
                let k: Vec<String> = new.faces[i]
                    .sides
                    .iter()
                    .map(|&oe| new.end_token(oe))
                    .collect();
                !old_keys.contains(&k)
            })
            .collect();
        let mut punctures: BTreeSet<PointIx> = BTreeSet::new();
        let mut holes = 0u64;
        let mut genus = 0u64;
        for f in &unmatched_old {
            punctures.extend(translate_points(self, &new, &f.punctures));
            holes += f.holes;
            genus += f.genus;
        }
        for p in isolated {
            punctures.insert(
                new.point_index(&self.points[p].name)
                    .ok_or_else(|| Error::Internal("point lost".into()))?,
            );
        }
        match born.len() {
            0 => {
                if !punctures.is_empty() || holes > 0 || genus > 0 {
                    return Err(Error::UnsupportedCase(
                        "removing the last wall of a region with content".into(),
                    ));
                }
            }
            1 => {
                let anchor = new.faces[born[0]].sides[0];
                new.add_face_content(anchor, &punctures, holes, genus);
            }
            2 => {
                // One region with two boundary walks: both sides are big;
                // record the extra walk of each as a hole of the other.
                let a0 = new.faces[born[0]].sides[0];
                let a1 = new.faces[born[1]].sides[0];
                new.add_face_content(a0, &punctures, holes + 1, genus);
                new.add_face_content(a1, &BTreeSet::new(), 1, 0);
            }
            _ => return Err(Error::Internal("arc removal created 3+ faces".into())),
        }
        Ok(new)
    }

    /// Restrict to the sub-partial-triangulation on the named arcs.
    pub fn restrict_to(&self, keep: &BTreeSet<String>) -> Result<Surface<F>> {
        let mut cur = self.clone();
        loop {
            let victim = cur
                .arc_indices()
                .into_iter()
                .find(|&e| !keep.contains(&cur.edges[e].name));
            match victim {
                None => return Ok(cur),
                Some(e) => cur = cur.remove_arc(e)?,
            }
        }
    }
}

fn new_edge_map<F: Field>(s: &Surface<F>) -> HashMap<String, usize> {
    s.edges
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.clone(), i))
        .collect()
}

fn translate_points<F: Field>(
    from: &Surface<F>,
    to: &Surface<F>,
    pts: &BTreeSet<PointIx>,
) -> BTreeSet<PointIx> {
    pts.iter()
        .map(|&p| to.point_index(&from.points[p].name).expect("point preserved"))
        .collect()
}

/// Realize a ribbon graph as a partial triangulation whose algebra is the
/// corresponding Brauer graph algebra: every vertex becomes an interior
/// marked point and every traced face keeps a bare hole.
pub fn ribbon_graph_to_surface<F: Field>(rg: &RibbonGraph<F>) -> Result<Surface<F>> {
    if rg.vertices.is_empty() || rg.edges.is_empty() {
        return Err(Error::PreconditionFailed("empty ribbon graph".into()));
    }
    let vix: HashMap<&str, usize> = rg
        .vertices
        .iter()
        .enumerate()
        .map(|(i, (n, _, _))| (n.as_str(), i))
        .collect();
    let eix: HashMap<&str, usize> = rg
        .edges
        .iter()
        .enumerate()
        .map(|(i, (n, _, _))| (n.as_str(), i))
        .collect();
    // Trace faces of the abstract rotation system.
    let mut pos: HashMap<(usize, bool), (usize, usize)> = HashMap::new();
    let mut rotations: Vec<Vec<(usize, bool)>> = vec![Vec::new(); rg.vertices.len()];
    for (vname, rot) in &rg.rotations {
        let v = *vix
            .get(vname.as_str())
            .ok_or_else(|| Error::Parse(format!("unknown vertex {vname}")))?;
        for tok in rot {
            let (name, sign) = tok.split_at(tok.len() - 1);
            let fwdd = match sign {
                "+" => true,
                "-" => false,
                _ => return Err(Error::Parse(format!("bad token {tok}"))),
            };
            let e = *eix
                .get(name)
                .ok_or_else(|| Error::Parse(format!("unknown edge {name}")))?;
            pos.insert((e, fwdd), (v, rotations[v].len()));
            rotations[v].push((e, fwdd));
        }
    }
    for (i, (n, from, to)) in rg.edges.iter().enumerate() {
        for fwdd in [true, false] {
            let want = if fwdd { from } else { to };
            match pos.get(&(i, fwdd)) {
                None => {
                    return Err(Error::Parse(format!(
                        "end {n}{} missing from rotations",
                        if fwdd { "+" } else { "-" }
                    )))
                }
                Some(&(v, _)) => {
                    if rg.vertices[v].0 != *want {
                        return Err(Error::Parse(format!(
                            "end {n}{} placed at the wrong vertex",
                            if fwdd { "+" } else { "-" }
                        )));
                    }
                }
            }
        }
    }
    let endpoint = |oe: (usize, bool), start: bool| -> usize {
        let (e, f) = oe;
        let (_, from, to) = &rg.edges[e];
        let name = if f == start { from } else { to };
        vix[name.as_str()]
    };
    let next_side = |oe: (usize, bool)| -> (usize, bool) {
        let t = endpoint(oe, false);
        let rev = (oe.0, !oe.1);
        let (v, i) = pos[&rev];
        debug_assert_eq!(v, t);
        let rot = &rotations[v];
        rot[(i + rot.len() - 1) % rot.len()]
    };
    let mut seen: BTreeSet<(usize, bool)> = BTreeSet::new();
    let mut face_anchors: Vec<(usize, bool)> = Vec::new();
    for e in 0..rg.edges.len() {
        for fwdd in [true, false] {
            let start = (e, fwdd);
            if seen.contains(&start) {
                continue;
            }
            face_anchors.push(start);
            let mut cur = start;
            loop {
                seen.insert(cur);
                cur = next_side(cur);
                if cur == start {
                    break;
                }
            }
        }
    }
    let v = rg.vertices.len() as i64;
    let e = rg.edges.len() as i64;
    let f = face_anchors.len() as i64;
    let two_g = 2 - v + e - f;
    if two_g < 0 || two_g % 2 != 0 {
        return Err(Error::Internal("inconsistent ribbon graph Euler count".into()));
    }
    let raw = RawSurface {
        points: rg
            .vertices
            .iter()
            .map(|(n, m, l)| (n.clone(), *m, l.clone(), None))
            .collect(),
        boundaries: Vec::new(),
        arcs: rg.edges.clone(),
        rotations: rg.rotations.clone(),
        faces: face_anchors
            .iter()
            .map(|&(e, fwdd)| {
                (
                    format!("{}{}", rg.edges[e].0, if fwdd { "+" } else { "-" }),
                    Vec::new(),
                    1,
                    0,
                )
            })
            .collect(),
        genus: (two_g / 2) as u64,
        boundary_count: f as u64,
    };
    Surface::from_raw(&raw)
}
