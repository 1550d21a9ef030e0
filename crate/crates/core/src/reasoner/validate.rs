use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::materialize::instances_of;
use super::SubsumptionClosure;
use crate::schema::{PropertyKind, SchemaGraph};
use crate::store::{Assertion, Dataset};
use crate::term::{Datatype, Iri, PrefixTable, Term};
use crate::vocab::pmdt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    MinCardinality,
    MaxCardinality,
    Domain,
    Range,
    Disjointness,
    TemporalCycle,
    DatatypeRange,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::MinCardinality => "min-cardinality",
            ViolationKind::MaxCardinality => "max-cardinality",
            ViolationKind::Domain => "domain",
            ViolationKind::Range => "range",
            ViolationKind::Disjointness => "disjointness",
            ViolationKind::TemporalCycle => "temporal-cycle",
            ViolationKind::DatatypeRange => "datatype-range",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A closed-world constraint failure. `detail` lists the assertions that
/// certify it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub focus: Iri,
    pub kind: ViolationKind,
    pub constraint: String,
    pub detail: String,
}

impl Violation {
    /// One tab-separated report line.
    pub fn render(&self, prefixes: &PrefixTable) -> String {
        format!(
            "violation\t{}\t{}\t{}\t{}",
            self.kind,
            prefixes.render(&self.focus),
            self.constraint,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdvisoryKind {
    MissingFollowup,
}

impl AdvisoryKind {
    pub fn name(self) -> &'static str {
        match self {
            AdvisoryKind::MissingFollowup => "missing-followup",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Advisory {
    pub focus: Iri,
    pub kind: AdvisoryKind,
    pub expected_class: Iri,
}

impl Advisory {
    pub fn render(&self, prefixes: &PrefixTable) -> String {
        format!(
            "advisory\t{}\t{}\texpected {}",
            self.kind.name(),
            prefixes.render(&self.focus),
            prefixes.render(&self.expected_class)
        )
    }
}

fn render_all(assertions: &[Assertion], prefixes: &PrefixTable) -> String {
    assertions
        .iter()
        .map(|a| a.render(prefixes))
        .collect::<Vec<_>>()
        .join(" ; ")
}

/// Types of `x` closed under subsumption.
fn closed_types(closure: &SubsumptionClosure, ds: &Dataset, x: &Iri) -> BTreeSet<Iri> {
    let mut out = BTreeSet::new();
    for t in ds.types_of(x) {
        out.insert(t.clone());
        out.extend(closure.ancestors(t).iter().cloned());
    }
    out
}

/// Checks every cardinality, domain, range, datatype-range, disjointness and
/// temporal-ordering constraint over `ds`, treating it as complete.
pub fn validate(
    schema: &SchemaGraph,
    closure: &SubsumptionClosure,
    ds: &Dataset,
) -> Vec<Violation> {
    let prefixes = schema.prefixes();
    let mut out = Vec::new();
    let mut types_cache: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    let mut types = |x: &Iri| -> BTreeSet<Iri> {
        types_cache
            .entry(x.clone())
            .or_insert_with(|| closed_types(closure, ds, x))
            .clone()
    };

    for r in schema.restrictions() {
        let constraint = r.describe(prefixes);
        for x in instances_of(closure, ds, &r.on_class) {
            let values: Vec<Assertion> = ds
                .objects(&x, &r.on_property)
                .map(|o| Assertion::new(x.clone(), r.on_property.clone(), o.clone()))
                .collect();
            let n = values.len() as u32;
            let typing = ds
                .types_of(&x)
                .find(|t| closure.is_subclass(t, &r.on_class))
                .map(|t| Assertion::typed(x.clone(), t.clone()))
                .expect("instance has a subsumed type");
            if n < r.min {
                let mut shown = vec![typing];
                shown.extend(values);
                out.push(Violation {
                    focus: x.clone(),
                    kind: ViolationKind::MinCardinality,
                    constraint: constraint.clone(),
                    detail: format!("{n} value(s): {}", render_all(&shown, prefixes)),
                });
            } else if r.max.is_some_and(|m| n > m) {
                let mut shown = vec![typing];
                shown.extend(values);
                out.push(Violation {
                    focus: x.clone(),
                    kind: ViolationKind::MaxCardinality,
                    constraint: constraint.clone(),
                    detail: format!("{n} value(s): {}", render_all(&shown, prefixes)),
                });
            }
        }
    }

    for a in ds.iter() {
        if a.is_type() {
            continue;
        }
        let Some(p) = schema.property(&a.predicate) else {
            continue;
        };
        let pname = prefixes.render(&p.iri);
        if !p.domain.is_empty() {
            let ts = types(&a.subject);
            if p.domain.is_disjoint(&ts) {
                let names: Vec<_> = p.domain.iter().map(|d| prefixes.render(d)).collect();
                out.push(Violation {
                    focus: a.subject.clone(),
                    kind: ViolationKind::Domain,
                    constraint: format!("{pname} domain {}", names.join("|")),
                    detail: render_all(std::slice::from_ref(a), prefixes),
                });
            }
        }
        match (p.kind, &a.object) {
            (PropertyKind::Object, Term::Iri(o)) => {
                if !p.range.is_empty() && p.range.is_disjoint(&types(o)) {
                    let names: Vec<_> = p.range.iter().map(|d| prefixes.render(d)).collect();
                    out.push(Violation {
                        focus: a.subject.clone(),
                        kind: ViolationKind::Range,
                        constraint: format!("{pname} range {}", names.join("|")),
                        detail: render_all(std::slice::from_ref(a), prefixes),
                    });
                }
            }
            (PropertyKind::Data, Term::Literal(l)) => {
                let allowed = p.datatypes();
                if !allowed.is_empty() && !allowed.contains(&l.datatype()) {
                    let names: Vec<_> = allowed.iter().map(|d: &Datatype| d.name()).collect();
                    out.push(Violation {
                        focus: a.subject.clone(),
                        kind: ViolationKind::Range,
                        constraint: format!("{pname} range {}", names.join("|")),
                        detail: render_all(std::slice::from_ref(a), prefixes),
                    });
                    continue;
                }
                let below = p
                    .min_inclusive
                    .as_ref()
                    .is_some_and(|m| l.compare_value(m).is_none_or(|o| o.is_lt()));
                let above = p
                    .max_inclusive
                    .as_ref()
                    .is_some_and(|m| l.compare_value(m).is_none_or(|o| o.is_gt()));
                if below || above {
                    let bound = |b: &Option<crate::term::Literal>| {
                        b.as_ref()
                            .map_or("*".to_string(), |l| l.lexical().to_string())
                    };
                    out.push(Violation {
                        focus: a.subject.clone(),
                        kind: ViolationKind::DatatypeRange,
                        constraint: format!(
                            "{pname} in [{}, {}]",
                            bound(&p.min_inclusive),
                            bound(&p.max_inclusive)
                        ),
                        detail: render_all(std::slice::from_ref(a), prefixes),
                    });
                }
            }
            (PropertyKind::Object, Term::Literal(_)) | (PropertyKind::Data, Term::Iri(_)) => {
                out.push(Violation {
                    focus: a.subject.clone(),
                    kind: ViolationKind::Range,
                    constraint: format!("{pname} kind"),
                    detail: render_all(std::slice::from_ref(a), prefixes),
                });
            }
        }
    }

    for (a, b) in schema.disjoint_pairs() {
        let xs = instances_of(closure, ds, a);
        let ys = instances_of(closure, ds, b);
        for x in xs.intersection(&ys) {
            let shown: Vec<Assertion> = ds
                .types_of(x)
                .filter(|t| closure.is_subclass(t, a) || closure.is_subclass(t, b))
                .map(|t| Assertion::typed(x.clone(), t.clone()))
                .collect();
            out.push(Violation {
                focus: x.clone(),
                kind: ViolationKind::Disjointness,
                constraint: format!("{} disjoint {}", prefixes.render(a), prefixes.render(b)),
                detail: render_all(&shown, prefixes),
            });
        }
    }

    for state in precedes_cycles(ds) {
        out.push(Violation {
            focus: state.clone(),
            kind: ViolationKind::TemporalCycle,
            constraint: "pmdt:precedes is irreflexive".into(),
            detail: format!(
                "{} reaches itself through pmdt:precedes",
                prefixes.render(&state)
            ),
        });
    }

    out.sort();
    out.dedup();
    out
}

/// Individuals that reach themselves through `precedes`.
fn precedes_cycles(ds: &Dataset) -> Vec<Iri> {
    let precedes = pmdt("precedes");
    let mut edges: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
    for a in ds.with_predicate(&precedes) {
        if let Term::Iri(o) = &a.object {
            edges.entry(&a.subject).or_default().push(o);
        }
    }
    let mut out = Vec::new();
    for &start in edges.keys() {
        let mut seen = BTreeSet::new();
        let mut stack = edges[start].clone();
        while let Some(x) = stack.pop() {
            if x == start {
                out.push(start.clone());
                break;
            }
            if seen.insert(x) {
                stack.extend(edges.get(x).into_iter().flatten());
            }
        }
    }
    out
}

/// (treatment class, follow-up class, follow-up link)
const FOLLOWUP_RULES: &[(&str, &str, &str)] = &[
    ("Surgery", "SurgeryFollowup", "followUpOfSurgery"),
    ("Medication", "MedicationFollowup", "followUpOfMedication"),
    (
        "CancerTherapy",
        "CancerTherapyFollowup",
        "followUpOfCancerTherapy",
    ),
];

/// Treatments without any inbound follow-up link.
pub fn advise_followups(
    _schema: &SchemaGraph,
    closure: &SubsumptionClosure,
    ds: &Dataset,
) -> Vec<Advisory> {
    let mut out = Vec::new();
    for (treatment, followup, link) in FOLLOWUP_RULES {
        let link = pmdt(link);
        for t in instances_of(closure, ds, &pmdt(treatment)) {
            if ds.subjects(&link, &Term::Iri(t.clone())).next().is_none() {
                out.push(Advisory {
                    focus: t,
                    kind: AdvisoryKind::MissingFollowup,
                    expected_class: pmdt(followup),
                });
            }
        }
    }
    out.sort();
    out
}

/// True when `class` is `PatientData` or one of its subclasses.
pub fn is_patient_data_class(closure: &SubsumptionClosure, class: &Iri) -> bool {
    closure.is_subclass(class, &pmdt("PatientData"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::bootstrap_pmdt_schema;
    use crate::reasoner::classify;
    use crate::term::Literal;
    use crate::vocab::ex;

    fn check(ds: &Dataset) -> Vec<Violation> {
        let s = bootstrap_pmdt_schema();
        let c = classify(&s);
        validate(&s, &c, ds)
    }

    fn diagnosis(patients: &[&str], diseases: &[&str]) -> Dataset {
        let mut ds = Dataset::new();
        ds.insert(Assertion::typed(ex("dx"), pmdt("Diagnosis")));
        for p in patients {
            ds.insert(Assertion::typed(ex(p), pmdt("Patient")));
            ds.insert(Assertion::new(ex(p), pmdt("hasPatientData"), ex("data")));
            ds.insert(Assertion::new(ex("dx"), pmdt("concernsPatient"), ex(p)));
        }
        ds.insert(Assertion::typed(ex("data"), pmdt("MedicalHistory")));
        for d in diseases {
            ds.insert(Assertion::typed(ex(d), pmdt("Disease")));
            ds.insert(Assertion::new(ex("dx"), pmdt("concernsDisease"), ex(d)));
        }
        ds
    }

    #[test]
    fn clean_diagnosis() {
        assert_eq!(check(&diagnosis(&["p"], &["d"])), vec![]);
    }

    #[test]
    fn two_patients() {
        let v = check(&diagnosis(&["p", "q"], &["d"]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::MaxCardinality);
        assert!(v[0].detail.contains("ex:p") && v[0].detail.contains("ex:q"));
    }

    #[test]
    fn no_disease() {
        let v = check(&diagnosis(&["p"], &[]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::MinCardinality);
    }

    #[test]
    fn disjoint_types() {
        let mut ds = Dataset::new();
        ds.insert(Assertion::typed(ex("x"), pmdt("MedicalStakeholder")));
        ds.insert(Assertion::typed(ex("x"), pmdt("Patient")));
        ds.insert(Assertion::typed(ex("d"), pmdt("TestData")));
        ds.insert(Assertion::new(ex("x"), pmdt("hasPatientData"), ex("d")));
        let v = check(&ds);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind, ViolationKind::Disjointness);
    }

    #[test]
    fn grade_out_of_range() {
        let mut ds = Dataset::new();
        ds.insert(Assertion::typed(ex("g"), pmdt("SeverityGrade")));
        ds.insert(Assertion::new(
            ex("g"),
            pmdt("gradeValue"),
            Literal::integer(7),
        ));
        let v = check(&ds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DatatypeRange);
    }

    #[test]
    fn domain_and_range() {
        let mut ds = Dataset::new();
        ds.insert(Assertion::typed(ex("t"), pmdt("Test")));
        ds.insert(Assertion::typed(ex("u"), pmdt("Test")));
        ds.insert(Assertion::new(ex("t"), pmdt("causedBy"), ex("u")));
        let kinds: Vec<_> = check(&ds).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::Domain, ViolationKind::Range]);
    }

    #[test]
    fn missing_followup_advisory() {
        let s = bootstrap_pmdt_schema();
        let c = classify(&s);
        let mut ds = Dataset::new();
        ds.insert(Assertion::typed(ex("m"), pmdt("Medication")));
        let a = advise_followups(&s, &c, &ds);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].expected_class, pmdt("MedicationFollowup"));
        ds.insert(Assertion::typed(ex("f"), pmdt("MedicationFollowup")));
        ds.insert(Assertion::new(
            ex("f"),
            pmdt("followUpOfMedication"),
            ex("m"),
        ));
        assert!(advise_followups(&s, &c, &ds).is_empty());
        assert!(advise_followups(&s, &c, &Dataset::new()).is_empty());
    }
}
