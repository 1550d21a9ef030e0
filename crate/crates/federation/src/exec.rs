use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{mpsc, Arc};
use std::time::Duration;

use chrono::{DateTime, Utc};
use pmdt_core::query::{finalize, parse_query, rewrite_with_subsumption, BindingSet, QueryAst};
use pmdt_core::reasoner::{classify, SubsumptionClosure};
use pmdt_core::{Dataset, PrefixTable, SchemaGraph, Term};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::audit::{default_origin, AuditAction, AuditEntry};
use crate::descriptor::SiteDescriptor;
use crate::local::{execute_local_plan, touched_terms, translate_to_local_plan};
use crate::plan::{decompose, CapabilityIndex, FederatedPlan};
use crate::relation::Relation;
use crate::site::Site;
use crate::wire::{Direction, Payload, WireMessage};
use crate::FederationError;

/// Roles accepted even when no policy mentions them.
pub const DEFAULT_ROLES: &[&str] = &["clinician", "data-steward", "patient", "researcher"];

/// Knobs for simulating an unreliable network.
#[derive(Clone, Debug, Default)]
pub struct ExecOptions {
    /// Sites that fail to answer.
    pub unavailable: BTreeSet<String>,
    /// Artificial delay before a site answers.
    pub latency: BTreeMap<String, Duration>,
    /// Shuffle responses with this seed before the coordinator sees them.
    pub shuffle_seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct FederatedOutcome {
    pub bindings: BindingSet,
    /// Audit entries written during this execution, by site then time.
    pub audit: Vec<AuditEntry>,
    /// Every message exchanged, by group then site, request before response.
    pub messages: Vec<WireMessage>,
    pub plan: FederatedPlan,
}

/// A coordinator plus its registered sites, all sharing one global schema.
pub struct Federation {
    schema: Arc<SchemaGraph>,
    closure: Arc<SubsumptionClosure>,
    sites: BTreeMap<String, Site>,
    index: CapabilityIndex,
    clock_origin: DateTime<Utc>,
}

impl std::fmt::Debug for Federation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Federation")
            .field("sites", &self.sites.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Federation {
    pub fn new(schema: SchemaGraph) -> Self {
        let closure = classify(&schema);
        Federation {
            schema: Arc::new(schema),
            closure: Arc::new(closure),
            sites: BTreeMap::new(),
            index: CapabilityIndex::default(),
            clock_origin: default_origin(),
        }
    }

    /// Start of the logical audit clock for sites registered afterwards.
    pub fn with_clock_origin(mut self, origin: DateTime<Utc>) -> Self {
        self.clock_origin = origin;
        self
    }

    pub fn schema(&self) -> &SchemaGraph {
        &self.schema
    }

    pub fn closure(&self) -> &SubsumptionClosure {
        &self.closure
    }

    /// Registers a site, reading each table from its `csvPath`.
    pub fn register_site(&mut self, desc: &SiteDescriptor) -> Result<(), FederationError> {
        let mut data = BTreeMap::new();
        for t in &desc.tables {
            let text =
                std::fs::read_to_string(&t.csv_path).map_err(|source| FederationError::Io {
                    path: t.csv_path.clone(),
                    source,
                })?;
            data.insert(t.table_name.clone(), text);
        }
        self.register_site_with_data(desc, &data)
    }

    /// Registers a site whose table contents are given in memory, keyed by
    /// table name.
    pub fn register_site_with_data(
        &mut self,
        desc: &SiteDescriptor,
        csv_text: &BTreeMap<String, String>,
    ) -> Result<(), FederationError> {
        if self.sites.contains_key(&desc.site_id) {
            return Err(FederationError::DuplicateSite(desc.site_id.clone()));
        }
        let site = Site::load(
            desc,
            csv_text,
            self.schema.clone(),
            self.closure.clone(),
            self.clock_origin,
        )?;
        self.sites.insert(site.id.clone(), site);
        self.index = CapabilityIndex::build(self.sites.values(), &self.closure);
        Ok(())
    }

    /// Registers every `*.json` descriptor in `dir`, in file-name order.
    pub fn register_dir(&mut self, dir: impl AsRef<Path>) -> Result<usize, FederationError> {
        let dir = dir.as_ref();
        let io = |source| FederationError::Io {
            path: dir.to_path_buf(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        for p in &paths {
            self.register_site(&SiteDescriptor::from_file(p)?)?;
        }
        Ok(paths.len())
    }

    pub fn site(&self, id: &str) -> Option<&Site> {
        self.sites.get(id)
    }

    pub fn sites(&self) -> impl Iterator<Item = &Site> {
        self.sites.values()
    }

    pub fn capability_index(&self) -> &CapabilityIndex {
        &self.index
    }

    /// Roles the coordinator accepts: the defaults plus any named by a policy.
    pub fn roles(&self) -> BTreeSet<String> {
        let mut roles: BTreeSet<String> = DEFAULT_ROLES.iter().map(|r| r.to_string()).collect();
        for s in self.sites.values() {
            roles.extend(s.policies.iter().map(|p| p.role.clone()));
        }
        roles
    }

    /// Union of every site's lifted data, ignoring consent and policy.
    pub fn lifted_union(&self) -> Dataset {
        let mut ds = Dataset::new();
        for s in self.sites.values() {
            ds.extend(&lift_site(s));
        }
        ds
    }

    pub fn decompose(&self, ast: &QueryAst) -> Result<FederatedPlan, FederationError> {
        decompose(ast, &self.index, &self.closure)
    }

    pub fn execute(
        &self,
        ast: &QueryAst,
        role: &str,
        options: &ExecOptions,
    ) -> Result<FederatedOutcome, FederationError> {
        execute_federated(self, ast, role, options)
    }
}

/// Every assertion produced by the site's table mappings.
pub fn lift_site(site: &Site) -> Dataset {
    site.lift()
}

impl Site {
    /// Serves a batch of encoded requests, returning encoded responses in the
    /// same order. Consent exclusions are audited once per data category.
    pub fn handle_batch(&self, requests: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let mut exclusions: BTreeMap<(String, pmdt_core::Iri), usize> = BTreeMap::new();
        let responses = requests
            .iter()
            .map(|bytes| {
                let payload = match WireMessage::decode(bytes) {
                    Ok(WireMessage {
                        payload: Payload::Query { role, text },
                        direction: Direction::Request,
                        ..
                    }) => self.answer(&role, &text, &mut exclusions),
                    Ok(_) => Payload::Error("expected a query request".into()),
                    Err(e) => Payload::Error(e.to_string()),
                };
                WireMessage::response(&self.id, payload).encode()
            })
            .collect();
        let prefixes = PrefixTable::default();
        for ((role, class), n) in exclusions {
            self.audit(
                &role,
                AuditAction::ConsentExclusion,
                format!(
                    "withheld {n} row(s) of {} lacking patient consent",
                    prefixes.render(&class)
                ),
            );
        }
        responses
    }

    fn answer(
        &self,
        role: &str,
        text: &str,
        exclusions: &mut BTreeMap<(String, pmdt_core::Iri), usize>,
    ) -> Payload {
        let ast = match parse_query(text) {
            Ok(a) => a,
            Err(e) => return Payload::Error(format!("unparseable sub-query: {e}")),
        };
        let expanded = match rewrite_with_subsumption(&ast, &self.closure) {
            Ok(a) => a,
            Err(e) => return Payload::Error(e.to_string()),
        };
        let plan = match translate_to_local_plan(self, &expanded) {
            Ok(p) => p,
            Err(e) => return Payload::Error(e.to_string()),
        };
        let patterns: Vec<String> = ast
            .patterns
            .iter()
            .map(|p| p.render(&ast.prefixes))
            .collect();
        if let Some(hits) = self.policy_denial(role, &touched_terms(self, &plan, &ast)) {
            let hits: Vec<String> = hits.iter().map(|h| ast.prefixes.render(h)).collect();
            let detail = format!("deny {} for {}", hits.join(","), patterns.join(" . "));
            self.audit(role, AuditAction::PolicyDenial, detail.clone());
            return Payload::Denied(detail);
        }
        self.audit(role, AuditAction::Subquery, patterns.join(" . "));
        match execute_local_plan(self, &plan) {
            Ok(result) => {
                for (class, n) in result.consent_exclusions {
                    *exclusions.entry((role.to_string(), class)).or_default() += n;
                }
                Payload::Bindings(result.bindings)
            }
            Err(f) => Payload::Error(format!(
                "filter #{} `{}` compares incomparable terms",
                f.0,
                plan.filters[f.0].render(&ast.prefixes)
            )),
        }
    }
}

/// Decomposes `ast`, sends each group to its sites concurrently, and joins
/// the partial results at the coordinator.
pub fn execute_federated(
    fed: &Federation,
    ast: &QueryAst,
    role: &str,
    options: &ExecOptions,
) -> Result<FederatedOutcome, FederationError> {
    if !fed.roles().contains(role) {
        return Err(FederationError::UnknownRole(role.to_string()));
    }
    let mut plan = fed.decompose(ast)?;
    for g in &plan.groups {
        if let Some(s) = g.sites.iter().find(|s| options.unavailable.contains(*s)) {
            return Err(FederationError::SiteUnavailable(s.clone()));
        }
    }
    let subqueries: Vec<QueryAst> = (0..plan.groups.len())
        .map(|g| plan.subquery(ast, g))
        .collect();
    let mut per_site: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (g, group) in plan.groups.iter().enumerate() {
        for s in &group.sites {
            per_site.entry(s.as_str()).or_default().push(g);
        }
    }
    let log_marks: BTreeMap<&str, usize> = per_site
        .keys()
        .map(|s| (*s, fed.sites[*s].audit_log().len()))
        .collect();
    let requests: BTreeMap<(usize, &str), WireMessage> = per_site
        .iter()
        .flat_map(|(s, gs)| gs.iter().map(move |&g| (g, *s)))
        .map(|(g, s)| {
            (
                (g, s),
                WireMessage::request(s, role, &subqueries[g].render()),
            )
        })
        .collect();

    let (tx, rx) = mpsc::channel::<(usize, String, Vec<u8>)>();
    std::thread::scope(|scope| {
        for (s, gs) in &per_site {
            let tx = tx.clone();
            let site = &fed.sites[*s];
            let batch: Vec<Vec<u8>> = gs.iter().map(|&g| requests[&(g, *s)].encode()).collect();
            let delay = options.latency.get(*s).copied();
            scope.spawn(move || {
                if let Some(d) = delay {
                    std::thread::sleep(d);
                }
                for (g, resp) in gs.iter().zip(site.handle_batch(&batch)) {
                    tx.send((*g, site.id.clone(), resp))
                        .expect("coordinator is listening");
                }
            });
        }
    });
    drop(tx);
    let mut arrivals: Vec<(usize, String, Vec<u8>)> = rx.into_iter().collect();
    if let Some(seed) = options.shuffle_seed {
        arrivals.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut partial: Vec<Relation> = subqueries
        .iter()
        .map(|q| Relation::new(q.select.clone()))
        .collect();
    let mut responses: BTreeMap<(usize, String), WireMessage> = BTreeMap::new();
    let mut denied: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    let mut failures: BTreeMap<(usize, String), String> = BTreeMap::new();
    for (g, site, bytes) in arrivals {
        let msg = WireMessage::decode(&bytes)?;
        match &msg.payload {
            Payload::Bindings(b) => {
                if b.columns != subqueries[g].select {
                    return Err(FederationError::Protocol(format!(
                        "site {site} answered with columns {:?}, requested {:?}",
                        b.columns, subqueries[g].select
                    )));
                }
                partial[g].rows.extend(b.rows.iter().cloned());
            }
            Payload::Denied(_) => {
                denied.entry(g).or_default().insert(site.clone());
            }
            Payload::Error(m) => {
                failures.insert((g, site.clone()), m.clone());
            }
            Payload::Query { .. } => {
                return Err(FederationError::Protocol(format!(
                    "site {site} sent a query"
                )))
            }
        }
        responses.insert((g, site), msg);
    }
    if let Some(((_, site), message)) = failures.into_iter().next() {
        return Err(FederationError::SiteFailure { site, message });
    }
    for (g, sites) in &denied {
        if sites.len() == plan.groups[*g].sites.len() {
            let patterns: Vec<String> = plan.groups[*g]
                .patterns
                .iter()
                .map(|&i| ast.patterns[i].render(&ast.prefixes))
                .collect();
            return Err(FederationError::PolicyDenied {
                role: role.to_string(),
                patterns: patterns.join(" . "),
            });
        }
    }

    let mut order: Vec<usize> = (0..plan.groups.len()).collect();
    order.sort_by(|&a, &b| {
        (partial[a].len(), partial[a].vars.first())
            .cmp(&(partial[b].len(), partial[b].vars.first()))
    });
    plan.coordinator_joins = order.clone();
    let mut joined = Relation::unit();
    for g in order {
        joined = joined.join(&partial[g]);
    }
    let residual: Vec<_> = plan
        .residual_filters
        .iter()
        .map(|&f| ast.filters[f].clone())
        .collect();
    if let Err(f) = joined.filter(&residual) {
        let index = plan.residual_filters[f.0];
        return Err(FederationError::Filter {
            index,
            filter: ast.filters[index].render(&ast.prefixes),
        });
    }
    let rows: Vec<Vec<Term>> = joined.project(&ast.select);
    let bindings = finalize(&ast.select, rows, &ast.order_by, ast.limit);

    let mut messages = Vec::new();
    for (key, req) in requests {
        messages.push(req);
        if let Some(resp) = responses.remove(&(key.0, key.1.to_string())) {
            messages.push(resp);
        }
    }
    let mut audit = Vec::new();
    for (s, mark) in log_marks {
        audit.extend(fed.sites[s].audit_log().into_iter().skip(mark));
    }
    Ok(FederatedOutcome {
        bindings,
        audit,
        messages,
        plan,
    })
}
