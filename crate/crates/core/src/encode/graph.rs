//! C2: a chemical graph over a tree-interior scaffold together with its
//! descriptor values.
//!
//! Interior vertices live in slots `0..n`; the used slots form a prefix.
//! Every pair of slots has an edge slot. Each used edge carries one-hot
//! multiplicity, adjacency-configuration and edge-configuration
//! indicators, which are tied to the endpoint element and degree channels
//! through slack pairs that only bind while the edge is used. Each used
//! slot may carry one fringe class, whose exterior vertices contribute
//! precomputed constants.

use std::collections::{BTreeMap, HashMap};

use crate::chemgraph::{Bond, ChemicalGraph, ElementSpec, ElementTable};
use crate::descriptors::{
    AdjacencyConfiguration, ChemicalSymbol, Descriptor, DescriptorRegistry, EdgeConfiguration,
    FringeClass,
};
use crate::milp::{LinExpr, MilpModel, Sense, VarId};

use super::{CountBounds, EncodeError, TopologySpec};

/// Slack bound on degree channels.
const DEGREE_SLACK: f64 = 8.0;

#[derive(Debug, Clone)]
struct Slot {
    used: VarId,
    /// One indicator per allowed element, in `elements` order.
    element: Vec<VarId>,
    /// `(class index, indicator)`.
    fringe: Vec<(usize, VarId)>,
}

#[derive(Debug, Clone)]
struct EdgeSlot {
    ends: (usize, usize),
    used: VarId,
    /// `(multiplicity, indicator)`.
    multiplicity: Vec<(u8, VarId)>,
}

/// Variables of an encoded graph and the map back to a [`ChemicalGraph`].
#[derive(Debug, Clone)]
pub struct GraphEncoding {
    elements: Vec<ElementSpec>,
    classes: Vec<FringeClass>,
    slots: Vec<Slot>,
    edges: Vec<EdgeSlot>,
    /// One variable per registry descriptor, in raw (unnormalized) units.
    pub x: Vec<VarId>,
}

struct Builder<'a> {
    m: &'a mut MilpModel,
    prefix: &'a str,
}

impl Builder<'_> {
    fn name(&self, s: &str) -> String {
        format!("{}.{s}", self.prefix)
    }

    fn binary(&mut self, s: &str) -> Result<VarId, EncodeError> {
        let n = self.name(s);
        Ok(self.m.add_binary(&n)?)
    }

    fn continuous(&mut self, s: &str, lo: f64, hi: f64) -> Result<VarId, EncodeError> {
        let n = self.name(s);
        Ok(self.m.add_continuous(&n, lo, hi)?)
    }

    fn constrain(&mut self, s: &str, e: impl Into<LinExpr>, sense: Sense, rhs: f64) -> Result<(), EncodeError> {
        let n = self.name(s);
        self.m.add_constraint(&n, e, sense, rhs)?;
        Ok(())
    }

    /// `target - Σ terms = Δ⁺ - Δ⁻` with `Δ⁺ + Δ⁻ <= big (1 - e)`.
    fn slack_link(
        &mut self,
        s: &str,
        target: &LinExpr,
        terms: &LinExpr,
        e: VarId,
        big: f64,
    ) -> Result<(), EncodeError> {
        let plus = self.continuous(&format!("{s}.dp"), 0.0, big)?;
        let minus = self.continuous(&format!("{s}.dm"), 0.0, big)?;
        let mut link = target.clone();
        link.add_expr(terms, -1.0).add_term(plus, -1.0).add_term(minus, 1.0);
        self.constrain(&format!("{s}.link"), link, Sense::Eq, 0.0)?;
        self.constrain(
            &format!("{s}.off"),
            vec![(plus, 1.0), (minus, 1.0), (e, big)],
            Sense::Le,
            big,
        )
    }
}

fn sum(vars: impl IntoIterator<Item = VarId>) -> LinExpr {
    let mut e = LinExpr::new();
    for v in vars {
        e.add_term(v, 1.0);
    }
    e
}

/// Encodes the graph part of the inverse problem under `prefix`.
///
/// Configurations, symbols and classes missing from `reg` are excluded,
/// since a graph containing them could not be featurized.
pub fn encode_graph(
    m: &mut MilpModel,
    prefix: &str,
    spec: &TopologySpec,
    reg: &DescriptorRegistry,
    table: &ElementTable,
) -> Result<GraphEncoding, EncodeError> {
    spec.validate()?;
    let rho = reg.rho();
    let n = spec.n_interior_max;
    let elements: Vec<ElementSpec> = spec.elements.keys().cloned().collect();
    let code: HashMap<&ElementSpec, f64> = elements.iter().zip(1..).map(|(e, c)| (e, f64::from(c))).collect();
    let label_slack = 2.0 * elements.len() as f64;

    let known = |d: &Descriptor| reg.index_of(d).is_some();
    for e in &elements {
        if !known(&Descriptor::ElementCount(e.clone())) {
            return Err(EncodeError::Inconsistent(format!(
                "element {} is not in the descriptor registry",
                e.label()
            )));
        }
    }
    let mut classes = Vec::new();
    for c in reg.fringe_classes(table)? {
        let bounds = match &spec.fringe {
            Some(allowed) => match allowed.get(c.code()) {
                Some(b) => *b,
                None => continue,
            },
            None => CountBounds::new(0, u32::MAX),
        };
        if code.contains_key(c.root_element()) && c.is_valence_feasible() && c.height() <= rho && bounds.upper > 0 {
            classes.push(c);
        }
    }
    if let Some(allowed) = &spec.fringe {
        for code in allowed.keys() {
            if !known(&Descriptor::Fringe(code.clone())) {
                return Err(EncodeError::Inconsistent(format!("fringe class {code} is not in the registry")));
            }
        }
    }
    let required = spec
        .ac
        .iter()
        .filter(|(_, b)| b.lower > 0)
        .map(|(k, _)| Descriptor::Adjacency(k.clone()))
        .chain(spec.ec.iter().filter(|(_, b)| b.lower > 0).map(|(k, _)| Descriptor::Edge(k.clone())))
        .chain(spec.ns.iter().filter(|(_, b)| b.lower > 0).map(|(k, _)| Descriptor::Symbol(k.clone())));
    for d in required {
        if !known(&d) {
            return Err(EncodeError::Inconsistent(format!("{d} is required but not in the registry")));
        }
    }
    let multiplicities: Vec<u8> = (1..=3u8)
        .filter(|mu| spec.bonds.get(mu).map_or(true, |b| b.upper > 0))
        .collect();
    // ordered configurations: both orientations of every registry key
    let mut ac_ordered: Vec<AdjacencyConfiguration> = Vec::new();
    let mut ec_ordered: Vec<EdgeConfiguration> = Vec::new();
    let mut symbols: Vec<ChemicalSymbol> = Vec::new();
    for d in reg.descriptors() {
        match d {
            Descriptor::Adjacency(ac)
                if code.contains_key(&ac.a)
                    && code.contains_key(&ac.b)
                    && multiplicities.contains(&ac.m)
                    && spec.ac.get(ac).map_or(true, |b| b.upper > 0) =>
            {
                ac_ordered.push(ac.clone());
                if !ac.reversed().eq(ac) {
                    ac_ordered.push(ac.reversed());
                }
            }
            Descriptor::Edge(ec) if spec.ec.get(ec).map_or(true, |b| b.upper > 0) => {
                ec_ordered.push(ec.clone());
                if !ec.reversed().eq(ec) {
                    ec_ordered.push(ec.reversed());
                }
            }
            Descriptor::Symbol(s)
                if code.contains_key(&s.element)
                    && s.degree <= s.element.valence()
                    && spec.ns.get(s).map_or(true, |b| b.upper > 0) =>
            {
                symbols.push(s.clone())
            }
            _ => {}
        }
    }
    let ac_pos: HashMap<&AdjacencyConfiguration, usize> =
        ac_ordered.iter().enumerate().map(|(t, a)| (a, t)).collect();
    ec_ordered.retain(|ec| ac_pos.contains_key(&ec.adjacency()));

    let mut b = Builder { m, prefix };

    // interior slots
    let mut slots: Vec<Slot> = Vec::with_capacity(n);
    for i in 0..n {
        let used = b.binary(&format!("u{i}"))?;
        if i < spec.n_interior_min {
            b.m.restrict_bounds(used, 1.0, 1.0)?;
        }
        let element = elements
            .iter()
            .enumerate()
            .map(|(t, _)| b.binary(&format!("a{i}.{t}")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut one = sum(element.iter().copied());
        one.add_term(used, -1.0);
        b.constrain(&format!("a{i}.one"), one, Sense::Eq, 0.0)?;
        let mut fringe = Vec::new();
        for (c, class) in classes.iter().enumerate() {
            let f = b.binary(&format!("f{i}.{c}"))?;
            let t = elements.iter().position(|e| e == class.root_element()).expect("filtered");
            b.constrain(&format!("f{i}.{c}.root"), vec![(f, 1.0), (element[t], -1.0)], Sense::Le, 0.0)?;
            fringe.push((c, f));
        }
        let mut at_most = sum(fringe.iter().map(|p| p.1));
        at_most.add_term(used, -1.0);
        b.constrain(&format!("f{i}.one"), at_most, Sense::Le, 0.0)?;
        if i > 0 {
            b.constrain(&format!("u{i}.order"), vec![(used, 1.0), (slots[i - 1].used, -1.0)], Sense::Le, 0.0)?;
        }
        slots.push(Slot { used, element, fringe });
    }
    let label = |s: &Slot| {
        let mut e = LinExpr::new();
        for (t, &v) in s.element.iter().enumerate() {
            e.add_term(v, (t + 1) as f64);
        }
        e
    };

    // edge slots
    let mut edges: Vec<EdgeSlot> = Vec::new();
    let mut ac_vars: Vec<Vec<(usize, VarId)>> = Vec::new();
    let mut ec_vars: Vec<Vec<(usize, VarId)>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let tag = format!("e{i}_{j}");
            let used = b.binary(&tag)?;
            for end in [i, j] {
                b.constrain(&format!("{tag}.end{end}"), vec![(used, 1.0), (slots[end].used, -1.0)], Sense::Le, 0.0)?;
            }
            let multiplicity = multiplicities
                .iter()
                .map(|&mu| Ok((mu, b.binary(&format!("{tag}.m{mu}"))?)))
                .collect::<Result<Vec<_>, EncodeError>>()?;
            let mut one = sum(multiplicity.iter().map(|p| p.1));
            one.add_term(used, -1.0);
            b.constrain(&format!("{tag}.m.one"), one, Sense::Eq, 0.0)?;
            let beta: LinExpr = multiplicity.iter().map(|&(mu, v)| (v, f64::from(mu))).collect::<Vec<_>>().into();

            let acs = ac_ordered
                .iter()
                .enumerate()
                .map(|(t, _)| Ok((t, b.binary(&format!("{tag}.ac{t}"))?)))
                .collect::<Result<Vec<_>, EncodeError>>()?;
            let mut one = sum(acs.iter().map(|p| p.1));
            one.add_term(used, -1.0);
            b.constrain(&format!("{tag}.ac.one"), one, Sense::Eq, 0.0)?;
            let mut mult = beta.clone();
            for &(t, v) in &acs {
                mult.add_term(v, -f64::from(ac_ordered[t].m));
            }
            b.constrain(&format!("{tag}.ac.m"), mult, Sense::Eq, 0.0)?;
            let tail: LinExpr = acs.iter().map(|&(t, v)| (v, code[&ac_ordered[t].a])).collect::<Vec<_>>().into();
            let head: LinExpr = acs.iter().map(|&(t, v)| (v, code[&ac_ordered[t].b])).collect::<Vec<_>>().into();
            b.slack_link(&format!("{tag}.ac.a"), &label(&slots[i]), &tail, used, label_slack)?;
            b.slack_link(&format!("{tag}.ac.b"), &label(&slots[j]), &head, used, label_slack)?;

            let ecs = ec_ordered
                .iter()
                .enumerate()
                .map(|(t, _)| Ok((t, b.binary(&format!("{tag}.ec{t}"))?)))
                .collect::<Result<Vec<_>, EncodeError>>()?;
            // edge-configurations project onto the chosen adjacency-configuration
            for &(t, v) in &acs {
                let mut proj = LinExpr::term(v, -1.0);
                for &(s, w) in &ecs {
                    if ac_pos[&ec_ordered[s].adjacency()] == t {
                        proj.add_term(w, 1.0);
                    }
                }
                b.constrain(&format!("{tag}.ec.p{t}"), proj, Sense::Eq, 0.0)?;
            }
            edges.push(EdgeSlot {
                ends: (i, j),
                used,
                multiplicity,
            });
            ac_vars.push(acs);
            ec_vars.push(ecs);
        }
    }

    let incident = |i: usize| -> Vec<usize> {
        (0..edges.len())
            .filter(|&k| edges[k].ends.0 == i || edges[k].ends.1 == i)
            .collect()
    };
    let beta_of = |k: usize| -> LinExpr {
        edges[k]
            .multiplicity
            .iter()
            .map(|&(mu, v)| (v, f64::from(mu)))
            .collect::<Vec<_>>()
            .into()
    };
    let degree = |i: usize| -> LinExpr {
        let mut d = sum(incident(i).iter().map(|&k| edges[k].used));
        for &(c, f) in &slots[i].fringe {
            d.add_term(f, f64::from(classes[c].root_degree()));
        }
        d
    };

    // degree channels of edge-configurations
    for (k, edge) in edges.iter().enumerate() {
        let (i, j) = edge.ends;
        let tag = format!("e{i}_{j}");
        let tail: LinExpr = ec_vars[k]
            .iter()
            .map(|&(t, v)| (v, f64::from(ec_ordered[t].mu.degree)))
            .collect::<Vec<_>>()
            .into();
        let head: LinExpr = ec_vars[k]
            .iter()
            .map(|&(t, v)| (v, f64::from(ec_ordered[t].mu_prime.degree)))
            .collect::<Vec<_>>()
            .into();
        b.slack_link(&format!("{tag}.ec.d"), &degree(i), &tail, edge.used, DEGREE_SLACK)?;
        b.slack_link(&format!("{tag}.ec.dp"), &degree(j), &head, edge.used, DEGREE_SLACK)?;
    }

    // per-slot symbols, valence and height conditions
    let mut ns_vars: Vec<Vec<(usize, VarId)>> = Vec::with_capacity(n);
    for (i, slot) in slots.iter().enumerate() {
        let vars = symbols
            .iter()
            .enumerate()
            .map(|(t, _)| Ok((t, b.binary(&format!("s{i}.{t}"))?)))
            .collect::<Result<Vec<_>, EncodeError>>()?;
        let mut one = sum(vars.iter().map(|p| p.1));
        one.add_term(slot.used, -1.0);
        b.constrain(&format!("s{i}.one"), one, Sense::Eq, 0.0)?;
        let mut deg = degree(i);
        let mut lab = label(slot);
        for &(t, v) in &vars {
            deg.add_term(v, -f64::from(symbols[t].degree));
            lab.add_term(v, -code[&symbols[t].element]);
        }
        b.constrain(&format!("s{i}.deg"), deg, Sense::Eq, 0.0)?;
        b.constrain(&format!("s{i}.elem"), lab, Sense::Eq, 0.0)?;
        ns_vars.push(vars);

        let mut valence = LinExpr::new();
        for &k in &incident(i) {
            valence.add_expr(&beta_of(k), 1.0);
        }
        for &(c, f) in &slot.fringe {
            valence.add_term(f, f64::from(classes[c].root_bond_sum()));
        }
        for (t, &v) in slot.element.iter().enumerate() {
            valence.add_term(v, -f64::from(elements[t].valence()));
        }
        b.constrain(&format!("v{i}"), valence, Sense::Le, 0.0)?;

        // an interior leaf needs a deep fringe tree and a lone interior
        // vertex a doubly deep one, otherwise stripping would remove them
        let mut height = sum(incident(i).iter().map(|&k| edges[k].used));
        height.add_term(slot.used, -2.0);
        for &(c, f) in &slot.fringe {
            let weight = u8::from(classes[c].is_deep(rho)) + u8::from(classes[c].is_doubly_deep(rho));
            height.add_term(f, f64::from(weight));
        }
        b.constrain(&format!("h{i}"), height, Sense::Ge, 0.0)?;
    }

    // tree: |E| = |V| - 1 and connected by a single-commodity flow from slot 0
    let used_sum = sum(slots.iter().map(|s| s.used));
    let mut tree = sum(edges.iter().map(|e| e.used));
    tree.add_expr(&used_sum, -1.0);
    b.constrain("tree", tree, Sense::Eq, -1.0)?;
    let cap = n.saturating_sub(1) as f64;
    let mut net = vec![LinExpr::new(); n];
    for edge in &edges {
        let (i, j) = edge.ends;
        let fwd = b.continuous(&format!("q{i}_{j}"), 0.0, cap)?;
        let back = b.continuous(&format!("q{j}_{i}"), 0.0, cap)?;
        for (f, tag) in [(fwd, format!("q{i}_{j}")), (back, format!("q{j}_{i}"))] {
            b.constrain(&format!("{tag}.cap"), vec![(f, 1.0), (edge.used, -cap)], Sense::Le, 0.0)?;
        }
        net[i].add_term(fwd, -1.0).add_term(back, 1.0);
        net[j].add_term(fwd, 1.0).add_term(back, -1.0);
    }
    for (i, mut inflow) in net.into_iter().enumerate() {
        if i == 0 {
            // the root emits one unit per other used slot
            inflow.add_expr(&used_sum, 1.0);
            b.constrain("flow0", inflow, Sense::Eq, 1.0)?;
        } else {
            inflow.add_term(slots[i].used, -1.0);
            b.constrain(&format!("flow{i}"), inflow, Sense::Eq, 0.0)?;
        }
    }
    for (&mu, bounds) in &spec.bonds {
        let count: Vec<(VarId, f64)> = edges
            .iter()
            .flat_map(|e| e.multiplicity.iter().filter(|p| p.0 == mu).map(|p| (p.1, 1.0)))
            .collect();
        add_bounded(&mut b, &format!("bonds{mu}"), count.into(), *bounds)?;
    }

    // descriptor values
    let class_sum = |weight: &dyn Fn(&FringeClass) -> f64| -> LinExpr {
        let mut e = LinExpr::new();
        for s in &slots {
            for &(c, f) in &s.fringe {
                let w = weight(&classes[c]);
                if w != 0.0 {
                    e.add_term(f, w);
                }
            }
        }
        e
    };
    let ordered_sum = |vars: &[Vec<(usize, VarId)>], keep: &dyn Fn(usize) -> bool| -> LinExpr {
        let mut e = LinExpr::new();
        for per_edge in vars {
            for &(t, v) in per_edge {
                if keep(t) {
                    e.add_term(v, 1.0);
                }
            }
        }
        e
    };
    let mut hydrogens = LinExpr::new();
    for s in &slots {
        for (t, &v) in s.element.iter().enumerate() {
            hydrogens.add_term(v, f64::from(elements[t].valence()));
        }
    }
    for k in 0..edges.len() {
        hydrogens.add_expr(&beta_of(k), -2.0);
    }
    hydrogens.add_expr(
        &class_sum(&|c| f64::from(c.exterior_hydrogens()) - f64::from(c.root_bond_sum())),
        1.0,
    );
    let mut atoms = used_sum.clone();
    atoms.add_expr(&class_sum(&|c| c.size() as f64), 1.0);
    let n_max = n + classes.iter().map(FringeClass::size).max().unwrap_or(0) * n;

    let mut x = Vec::with_capacity(reg.len());
    let mut atom_var = None;
    let mut mass_var = None;
    for (idx, d) in reg.descriptors().iter().enumerate() {
        let (expr, bounds): (LinExpr, Option<CountBounds>) = match d {
            Descriptor::AtomCount => (atoms.clone(), None),
            Descriptor::ElementCount(e) => {
                let mut expr = class_sum(&|c| f64::from(c.exterior_element_counts().get(e).copied().unwrap_or(0)));
                if let Some(t) = elements.iter().position(|x| x == e) {
                    for s in &slots {
                        expr.add_term(s.element[t], 1.0);
                    }
                }
                (expr, spec.elements.get(e).copied())
            }
            Descriptor::Rank => (LinExpr::new(), None),
            Descriptor::InteriorCount => (used_sum.clone(), None),
            Descriptor::InteriorEdgeCount => (sum(edges.iter().map(|e| e.used)), None),
            Descriptor::Adjacency(ac) => (
                ordered_sum(&ac_vars, &|t| ac_ordered[t] == *ac || ac_ordered[t] == ac.reversed()),
                spec.ac.get(ac).copied(),
            ),
            Descriptor::Edge(ec) => (
                ordered_sum(&ec_vars, &|t| ec_ordered[t] == *ec || ec_ordered[t] == ec.reversed()),
                spec.ec.get(ec).copied(),
            ),
            Descriptor::Symbol(s) => (
                ordered_sum(&ns_vars, &|t| symbols[t] == *s),
                spec.ns.get(s).copied(),
            ),
            Descriptor::Fringe(code) => {
                let bounds = spec.fringe.as_ref().and_then(|f| f.get(code).copied());
                (class_sum(&|c| f64::from(u8::from(c.code() == code))), bounds)
            }
            Descriptor::ImplicitHydrogens => (hydrogens.clone(), None),
            Descriptor::MassAverage => {
                let v = b.continuous(&format!("x{idx}"), 0.0, f64::MAX)?;
                mass_var = Some(v);
                x.push(v);
                continue;
            }
        };
        let upper = bounds.map_or(f64::from(u32::MAX), |b| f64::from(b.upper)).min(4.0 * n_max as f64 + 64.0);
        let lower = bounds.map_or(0.0, |b| f64::from(b.lower));
        let name = b.name(&format!("x{idx}"));
        let v = b.m.add_integer(&name, lower, upper.floor())?;
        let mut def = LinExpr::term(v, 1.0);
        def.add_expr(&expr, -1.0);
        b.constrain(&format!("x{idx}.def"), def, Sense::Eq, 0.0)?;
        if matches!(d, Descriptor::AtomCount) {
            atom_var = Some(v);
        }
        x.push(v);
    }
    if let Some(mass) = mass_var {
        let mut total = LinExpr::new();
        for s in &slots {
            for (t, &v) in s.element.iter().enumerate() {
                total.add_term(v, elements[t].mass());
            }
        }
        total.add_expr(&class_sum(&|c| c.exterior_mass()), 1.0);
        total.add_expr(&hydrogens, reg.hydrogen_mass());
        let heaviest = elements
            .iter()
            .chain(classes.iter().flat_map(|c| c.nodes()))
            .map(|e| e.mass() + f64::from(e.valence()) * reg.hydrogen_mass())
            .fold(0.0, f64::max);
        encode_mass_average(&mut b, mass, atom_var, &atoms, &total, spec.n_interior_min, n_max, heaviest)?;
    }

    Ok(GraphEncoding {
        elements,
        classes,
        slots,
        edges,
        x,
    })
}

fn add_bounded(b: &mut Builder<'_>, name: &str, expr: LinExpr, bounds: CountBounds) -> Result<(), EncodeError> {
    b.constrain(&format!("{name}.lo"), expr.clone(), Sense::Ge, f64::from(bounds.lower))?;
    b.constrain(&format!("{name}.hi"), expr, Sense::Le, f64::from(bounds.upper))
}

/// `mass = total / atoms`, linearized by a one-hot choice `ν_N` of the atom
/// count: `|mass - total / N| <= B (1 - ν_N)` for every candidate `N`.
#[allow(clippy::too_many_arguments)]
fn encode_mass_average(
    b: &mut Builder<'_>,
    mass: VarId,
    atom_var: Option<VarId>,
    atoms: &LinExpr,
    total: &LinExpr,
    n_lo: usize,
    n_hi: usize,
    heaviest: f64,
) -> Result<(), EncodeError> {
    b.m.restrict_bounds(mass, 0.0, heaviest)?;
    let mut one = LinExpr::new();
    let mut count = match atom_var {
        Some(v) => LinExpr::term(v, 1.0),
        None => atoms.clone(),
    };
    // rows are scaled by the atom count so that every coefficient stays a
    // short decimal
    for size in n_lo.max(1)..=n_hi {
        let big = heaviest * (size + n_hi) as f64;
        let pick = b.binary(&format!("na{size}"))?;
        one.add_term(pick, 1.0);
        count.add_term(pick, -(size as f64));
        let mut diff = LinExpr::term(mass, size as f64);
        diff.add_expr(total, -1.0);
        let mut hi = diff.clone();
        hi.add_term(pick, big);
        b.constrain(&format!("na{size}.hi"), hi, Sense::Le, big)?;
        diff.add_term(pick, -big);
        b.constrain(&format!("na{size}.lo"), diff, Sense::Ge, -big)?;
    }
    b.constrain("na.one", one, Sense::Eq, 1.0)?;
    b.constrain("na.count", count, Sense::Eq, 0.0)
}

impl GraphEncoding {
    /// Rebuilds the graph selected by a solver assignment.
    pub fn decode(&self, values: &[f64]) -> Result<ChemicalGraph, EncodeError> {
        let on = |v: VarId| values.get(v.0).is_some_and(|&x| x > 0.5);
        let mut atoms: Vec<ElementSpec> = Vec::new();
        let mut bonds: Vec<Bond> = Vec::new();
        let mut atom_of: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if !on(slot.used) {
                continue;
            }
            let chosen: Vec<usize> = (0..slot.element.len()).filter(|&t| on(slot.element[t])).collect();
            let [t] = chosen.as_slice() else {
                return Err(EncodeError::Decode(format!("slot {i} has {} elements", chosen.len())));
            };
            atom_of.insert(i, atoms.len());
            atoms.push(self.elements[*t].clone());
        }
        for edge in &self.edges {
            if !on(edge.used) {
                continue;
            }
            let (i, j) = edge.ends;
            let (Some(&a), Some(&c)) = (atom_of.get(&i), atom_of.get(&j)) else {
                return Err(EncodeError::Decode(format!("edge {i}-{j} touches an unused slot")));
            };
            let mult: Vec<u8> = edge.multiplicity.iter().filter(|p| on(p.1)).map(|p| p.0).collect();
            let [mu] = mult.as_slice() else {
                return Err(EncodeError::Decode(format!("edge {i}-{j} has no single multiplicity")));
            };
            bonds.push(Bond::new(a, c, *mu));
        }
        for (i, slot) in self.slots.iter().enumerate() {
            for &(c, f) in &slot.fringe {
                if !on(f) {
                    continue;
                }
                let root = *atom_of
                    .get(&i)
                    .ok_or_else(|| EncodeError::Decode(format!("fringe on unused slot {i}")))?;
                let class = &self.classes[c];
                let base = atoms.len();
                atoms.extend(class.nodes()[1..].iter().cloned());
                let at = |node: usize| if node == 0 { root } else { base + node - 1 };
                for &(child, parent, mu) in class.links() {
                    bonds.push(Bond::new(at(parent), at(child), mu));
                }
            }
        }
        if atoms.is_empty() {
            return Err(EncodeError::Decode("no used slots".into()));
        }
        ChemicalGraph::new(atoms, bonds).map_err(|e| EncodeError::Decode(e.to_string()))
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn classes(&self) -> &[FringeClass] {
        &self.classes
    }
}
