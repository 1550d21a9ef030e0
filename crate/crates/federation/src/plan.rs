use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use pmdt_core::query::{PatternTerm, QueryAst, TriplePattern};
use pmdt_core::reasoner::SubsumptionClosure;
use pmdt_core::{Iri, Term};

use crate::site::Site;
use crate::FederationError;

/// Which (site, table) pairs can answer each class or property. Class entries
/// cover tables whose row class is that class or any subclass of it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CapabilityIndex {
    entries: BTreeMap<Iri, BTreeSet<(String, String)>>,
}

impl CapabilityIndex {
    pub fn build<'a>(
        sites: impl IntoIterator<Item = &'a Site>,
        closure: &SubsumptionClosure,
    ) -> Self {
        let mut entries: BTreeMap<Iri, BTreeSet<(String, String)>> = BTreeMap::new();
        for site in sites {
            for t in &site.tables {
                let key = (site.id.clone(), t.name.clone());
                for c in closure.ancestors(&t.row_class) {
                    entries.entry(c.clone()).or_default().insert(key.clone());
                }
                entries
                    .entry(t.row_class.clone())
                    .or_default()
                    .insert(key.clone());
                for col in &t.columns {
                    entries
                        .entry(col.property.clone())
                        .or_default()
                        .insert(key.clone());
                }
            }
        }
        CapabilityIndex { entries }
    }

    pub fn tables(&self, term: &Iri) -> impl Iterator<Item = &(String, String)> {
        self.entries.get(term).into_iter().flatten()
    }

    pub fn sites(&self, term: &Iri) -> BTreeSet<String> {
        self.tables(term).map(|(s, _)| s.clone()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Iri, &BTreeSet<(String, String)>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Patterns sent together to a set of sites; results from the sites are
/// unioned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanGroup {
    pub sites: BTreeSet<String>,
    pub patterns: Vec<usize>,
    /// Filters whose variables are all bound inside the group.
    pub filters: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FederatedPlan {
    pub groups: Vec<PlanGroup>,
    /// Group indexes in the order the coordinator joins them; filled in once
    /// group result sizes are known.
    pub coordinator_joins: Vec<usize>,
    pub residual_filters: Vec<usize>,
}

impl FederatedPlan {
    /// Variables of group `g`, in order of first appearance.
    pub fn group_variables<'a>(&self, ast: &'a QueryAst, g: usize) -> Vec<&'a str> {
        let mut out: Vec<&str> = Vec::new();
        for &i in &self.groups[g].patterns {
            for v in ast.patterns[i].variables() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Variables group `g` must return: those selected, shared with another
    /// group, or needed by a residual filter.
    pub fn requested_variables(&self, ast: &QueryAst, g: usize) -> Vec<String> {
        let mut needed: BTreeSet<&str> = ast.select.iter().map(String::as_str).collect();
        for (h, _) in self.groups.iter().enumerate().filter(|(h, _)| *h != g) {
            needed.extend(self.group_variables(ast, h));
        }
        for &f in &self.residual_filters {
            needed.extend(ast.filters[f].variables());
        }
        let vars = self.group_variables(ast, g);
        let mut out: Vec<String> = vars
            .iter()
            .filter(|v| needed.contains(*v))
            .map(|v| v.to_string())
            .collect();
        if out.is_empty() {
            out.extend(vars.first().map(|v| v.to_string()));
        }
        out
    }

    /// The sub-query sent for group `g`.
    pub fn subquery(&self, ast: &QueryAst, g: usize) -> QueryAst {
        let group = &self.groups[g];
        QueryAst {
            select: self.requested_variables(ast, g),
            patterns: group
                .patterns
                .iter()
                .map(|&i| ast.patterns[i].clone())
                .collect(),
            filters: group
                .filters
                .iter()
                .map(|&f| ast.filters[f].clone())
                .collect(),
            distinct: true,
            order_by: Vec::new(),
            limit: None,
            prefixes: ast.prefixes.clone(),
        }
    }

    pub fn render(&self, ast: &QueryAst) -> String {
        let mut out = String::new();
        for (g, group) in self.groups.iter().enumerate() {
            let sites: Vec<&str> = group.sites.iter().map(String::as_str).collect();
            let kind = if group.sites.len() > 1 {
                "broadcast"
            } else {
                "local"
            };
            let _ = writeln!(out, "group {} {kind} @ {{{}}}", g + 1, sites.join(", "));
            for &i in &group.patterns {
                let _ = writeln!(out, "  {}", ast.patterns[i].render(&ast.prefixes));
            }
            for &f in &group.filters {
                let _ = writeln!(out, "  {}", ast.filters[f].render(&ast.prefixes));
            }
        }
        if !self.coordinator_joins.is_empty() {
            let order: Vec<String> = self
                .coordinator_joins
                .iter()
                .map(|g| (g + 1).to_string())
                .collect();
            let _ = writeln!(out, "join order: {}", order.join(" > "));
        }
        for &f in &self.residual_filters {
            let _ = writeln!(out, "residual {}", ast.filters[f].render(&ast.prefixes));
        }
        out
    }
}

fn answering_sites(
    p: &TriplePattern,
    index: &CapabilityIndex,
    closure: &SubsumptionClosure,
    ast: &QueryAst,
) -> Result<BTreeSet<String>, FederationError> {
    let render = || p.render(&ast.prefixes);
    if p.is_type_pattern() {
        let classes = match &p.object {
            PatternTerm::Term(Term::Iri(c)) => {
                if !closure.contains(c) {
                    return Err(FederationError::UnknownClass(c.clone()));
                }
                BTreeSet::from([c.clone()])
            }
            PatternTerm::OneOf(set) => set.clone(),
            _ => return Err(FederationError::UnsupportedPattern(render())),
        };
        let sites: BTreeSet<String> = classes.iter().flat_map(|c| index.sites(c)).collect();
        if sites.is_empty() {
            return Err(FederationError::UnanswerablePattern {
                pattern: render(),
                term: ast
                    .prefixes
                    .render(classes.iter().next().expect("non-empty class set")),
            });
        }
        return Ok(sites);
    }
    let pred = p
        .predicate_iri()
        .ok_or_else(|| FederationError::UnsupportedPattern(render()))?;
    let sites = index.sites(pred);
    if sites.is_empty() {
        return Err(FederationError::UnanswerablePattern {
            pattern: render(),
            term: ast.prefixes.render(pred),
        });
    }
    Ok(sites)
}

/// Splits `ast` into site groups: patterns answerable only at site S are
/// grouped for S by shared variables, so no group is a cross product; a
/// pattern answerable at several sites is its own group broadcast to all of
/// them.
/// Partitions `patterns` into components linked by shared variables. Ground
/// patterns join the first component.
fn connected(ast: &QueryAst, patterns: Vec<usize>) -> Vec<Vec<usize>> {
    let mut components: Vec<(BTreeSet<String>, Vec<usize>)> = Vec::new();
    let mut ground = Vec::new();
    for i in patterns {
        let vars: BTreeSet<String> = ast.patterns[i]
            .variables()
            .into_iter()
            .map(String::from)
            .collect();
        if vars.is_empty() {
            ground.push(i);
            continue;
        }
        let (linked, rest): (Vec<_>, Vec<_>) = components
            .into_iter()
            .partition(|(v, _)| !v.is_disjoint(&vars));
        let mut merged = (vars, vec![i]);
        for (v, ps) in linked {
            merged.0.extend(v);
            merged.1.extend(ps);
        }
        components = rest;
        components.push(merged);
    }
    let mut out: Vec<Vec<usize>> = components
        .into_iter()
        .map(|(_, mut ps)| {
            ps.sort_unstable();
            ps
        })
        .collect();
    out.sort();
    match out.first_mut() {
        Some(first) => {
            first.extend(ground);
            first.sort_unstable();
        }
        None if !ground.is_empty() => out.push(ground),
        None => {}
    }
    out
}

pub fn decompose(
    ast: &QueryAst,
    index: &CapabilityIndex,
    closure: &SubsumptionClosure,
) -> Result<FederatedPlan, FederationError> {
    let mut single: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut groups: Vec<PlanGroup> = Vec::new();
    for (i, p) in ast.patterns.iter().enumerate() {
        let sites = answering_sites(p, index, closure, ast)?;
        if sites.len() == 1 {
            single
                .entry(sites.into_iter().next().expect("one site"))
                .or_default()
                .push(i);
        } else {
            groups.push(PlanGroup {
                sites,
                patterns: vec![i],
                filters: Vec::new(),
            });
        }
    }
    for (site, patterns) in single {
        for patterns in connected(ast, patterns) {
            groups.push(PlanGroup {
                sites: BTreeSet::from([site.clone()]),
                patterns,
                filters: Vec::new(),
            });
        }
    }
    groups.sort_by_key(|g| g.patterns[0]);
    let mut plan = FederatedPlan {
        groups,
        coordinator_joins: Vec::new(),
        residual_filters: Vec::new(),
    };
    for g in 0..plan.groups.len() {
        if plan.group_variables(ast, g).is_empty() {
            let first = plan.groups[g].patterns[0];
            return Err(FederationError::UnsupportedPattern(format!(
                "{} (binds no variables)",
                ast.patterns[first].render(&ast.prefixes)
            )));
        }
    }
    for (f, filter) in ast.filters.iter().enumerate() {
        let mut pushed = false;
        for g in 0..plan.groups.len() {
            let vars = plan.group_variables(ast, g);
            if filter.variables().iter().all(|v| vars.contains(v)) {
                plan.groups[g].filters.push(f);
                pushed = true;
            }
        }
        if !pushed {
            plan.residual_filters.push(f);
        }
    }
    Ok(plan)
}
