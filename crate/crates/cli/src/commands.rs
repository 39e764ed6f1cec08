use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use intervene_core::sensitivity::{sensitivity_tsv, what_if_tsv};
use intervene_core::{
    bound_interventions_with, classify, compile_odd_with, error_bound_with, parse_network,
    sensitivity_rank, suggest_features, validate_network, what_if_table, ClassifierConfig,
    DoAssignment, Error, Evidence, FeatureAssignment, InterventionSpace, Label, Limits, Network,
    NetworkDoc, Odd, OddOptions, Rendering, RiskTable, SearchOptions, TargetRef, VariableOrder,
};
use intervene_service::{bound_response, run_query, Manifest, QueryRequest, ServiceConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Command;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io { path: PathBuf, message: String },
    Core(Error),
    Manifest { path: PathBuf, message: String },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 4,
            Failure::Io { .. } => 2,
            Failure::Core(Error::CapExceeded { .. }) => 3,
            Failure::Core(_) | Failure::Manifest { .. } => 1,
        }
    }

    /// `error: <code>: <message>` on a single line.
    pub fn diagnostic(&self) -> String {
        let (code, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io { path, message } => ("io", format!("{}: {message}", path.display())),
            Failure::Core(e) => (e.code(), e.to_string()),
            Failure::Manifest { path, message } => {
                ("invalid-manifest", format!("{}: {message}", path.display()))
            }
        };
        format!("error: {code}: {}", message.replace('\n', " "))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Text and JSON renderings of one result, built from the same values.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub json: Value,
    /// Files written besides stdout.
    pub files: Vec<PathBuf>,
    /// Nonzero when the command ran but found a problem (invalid model).
    pub exit_code: u8,
}

impl Output {
    fn new(text: String, json: Value) -> Self {
        Self {
            text,
            json,
            files: Vec::new(),
            exit_code: 0,
        }
    }
}

pub struct Context {
    pub rendering: Rendering,
    pub limits: Limits,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| {
        Failure::Core(Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    })
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    Ok(parse_network(&read_text(path)?)?)
}

fn load_space(path: &Path) -> Result<InterventionSpace, Failure> {
    Ok(InterventionSpace::from_json(&read_text(path)?)?)
}

fn load_config(path: &Path) -> Result<ClassifierConfig, Failure> {
    Ok(ClassifierConfig::from_json(&read_text(path)?)?)
}

/// `dir/demo.json` -> `dir/demo.manifest.json`.
pub fn manifest_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    model.with_file_name(format!("{stem}.manifest.json"))
}

/// An explicit file wins, then the model's manifest sidecar, then the
/// built-in table.
fn risk_table(model: &Path, explicit: Option<&Path>) -> Result<RiskTable, Failure> {
    if let Some(path) = explicit {
        return serde_json::from_str(&read_text(path)?)
            .map_err(|e| Failure::Core(Error::InvalidRiskTable(e.to_string())));
    }
    let sidecar = manifest_path(model);
    if !sidecar.is_file() {
        return Ok(RiskTable::default());
    }
    Manifest::from_json(&read_text(&sidecar)?)
        .map(|m| m.risk_table())
        .map_err(|message| Failure::Manifest {
            path: sidecar,
            message,
        })
}

fn pairs<T>(
    items: &[(String, String)],
    build: impl FnOnce(Vec<(String, String)>) -> intervene_core::Result<T>,
) -> Result<T, Failure> {
    Ok(build(items.to_vec())?)
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("result serializes")
}

fn render_witness(rendering: Rendering, value: f64, witness_text: &str) -> String {
    let witness = if witness_text.is_empty() {
        "none"
    } else {
        witness_text
    };
    format!("{} witness: {witness}", rendering.format(value))
}

/// Input files a command reads, for the run report digest.
pub fn inputs(command: &Command) -> Vec<&Path> {
    let mut out: Vec<&Path> = Vec::new();
    match command {
        Command::Validate { model } => out.push(model),
        Command::Query {
            model, risk_table, ..
        }
        | Command::Intervene {
            model, risk_table, ..
        } => {
            out.push(model);
            out.extend(risk_table.as_deref());
        }
        Command::Bounds { model, space, .. } => out.extend([model.as_path(), space]),
        Command::Classify {
            model,
            config,
            diagram,
            risk_table,
            ..
        } => {
            out.extend([model.as_path(), config]);
            out.extend(diagram.as_deref());
            out.extend(risk_table.as_deref());
        }
        Command::Compile { model, config, .. } => out.extend([model.as_path(), config]),
        Command::ErrorBound {
            model,
            config,
            space,
            diagram,
            ..
        } => {
            out.extend([model.as_path(), config, space]);
            out.extend(diagram.as_deref());
        }
        Command::Whatif { model, sets, .. } => {
            out.push(model);
            out.extend(sets.as_deref());
        }
        Command::Sensitivity { model, .. } => out.push(model),
        Command::Serve { .. } => {}
    }
    out
}

pub fn run(command: Command, ctx: &Context) -> Result<Output, Failure> {
    match command {
        Command::Validate { model } => validate(&model),
        Command::Query {
            model,
            target,
            conditioning,
            intervention,
            risk_table,
        }
        | Command::Intervene {
            model,
            target,
            conditioning,
            intervention,
            risk_table,
        } => query(
            ctx,
            &model,
            target,
            &conditioning.evidence,
            &intervention,
            risk_table.as_deref(),
        ),
        Command::Bounds {
            model,
            space,
            target,
            conditioning,
            direction,
        } => {
            let net = load_network(&model)?;
            let space = load_space(&space)?;
            let evidence = pairs(&conditioning.evidence, Evidence::from_pairs)?;
            let target = TargetRef::new(target.0, target.1);
            let opts = SearchOptions {
                limits: ctx.limits,
                ..SearchOptions::default()
            };
            let r = bound_interventions_with(
                &net,
                &target.variable,
                &target.state,
                &evidence,
                &space,
                direction,
                &opts,
            )?;
            let resp = bound_response(&net, &target, r);
            let text = format!(
                "{}\nexplored: {}\n",
                render_witness(ctx.rendering, resp.value, &resp.witness_text),
                resp.explored
            );
            Ok(Output::new(text, to_json(&resp)))
        }
        Command::Classify {
            model,
            config,
            features,
            diagram,
            risk_table: table_path,
        } => {
            let net = load_network(&model)?;
            let cfg = load_config(&config)?;
            let table = risk_table(&model, table_path.as_deref())?;
            let f = pairs(&features, FeatureAssignment::from_pairs)?;
            let (label, posterior, group) = match diagram {
                None => {
                    let c = classify(&net, &cfg, &f, &table)?;
                    (c.label, Some(c.posterior), Some(c.group))
                }
                Some(path) => {
                    let odd = Odd::read(&read_text(&path)?, &net, &cfg.features)?;
                    let label: Label = odd.evaluate(&f)?;
                    match classify(&net, &cfg, &f, &table) {
                        Ok(c) => (label, Some(c.posterior), Some(c.group)),
                        Err(Error::InconsistentEvidence) => (label, None, None),
                        Err(e) => return Err(e.into()),
                    }
                }
            };
            let text = format!(
                "{label}\t{}\t{}\n",
                posterior.map_or("-".into(), |p| ctx.rendering.format(p)),
                group.as_deref().unwrap_or("-")
            );
            let json = json!({
                "features": f,
                "label": label,
                "posterior": posterior,
                "risk_group": group,
            });
            Ok(Output::new(text, json))
        }
        Command::Compile {
            model,
            config,
            greedy_order,
            order,
            out,
        } => {
            let net = load_network(&model)?;
            let cfg = load_config(&config)?;
            let order = match (greedy_order, order) {
                (true, _) => VariableOrder::Greedy,
                (false, Some(names)) => VariableOrder::Explicit(names),
                (false, None) => VariableOrder::Given,
            };
            let opts = OddOptions {
                order,
                limits: ctx.limits,
                ..OddOptions::default()
            };
            let odd = compile_odd_with(&net, &cfg, &opts)?;
            let diagram = odd.to_text();
            let json = json!({
                "order": odd.order(),
                "support": odd.support(),
                "node_count": odd.node_count(),
                "diagram": diagram,
            });
            match out {
                None => Ok(Output::new(diagram, json)),
                Some(path) => {
                    std::fs::write(&path, &diagram).map_err(|e| Failure::Io {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
                    let text = format!(
                        "wrote {}\nnodes: {}\norder: {}\n",
                        path.display(),
                        odd.node_count(),
                        odd.order().join(",")
                    );
                    let mut output = Output::new(text, json);
                    output.files.push(path);
                    Ok(output)
                }
            }
        }
        Command::ErrorBound {
            model,
            config,
            space,
            kind,
            direction,
            diagram,
        } => {
            let net = load_network(&model)?;
            let cfg = load_config(&config)?;
            let space = load_space(&space)?;
            let odd = match diagram {
                Some(path) => Odd::read(&read_text(&path)?, &net, &cfg.features)?,
                None => compile_odd_with(
                    &net,
                    &cfg,
                    &OddOptions {
                        limits: ctx.limits,
                        ..OddOptions::default()
                    },
                )?,
            };
            let opts = SearchOptions {
                limits: ctx.limits,
                ..SearchOptions::default()
            };
            let eb = error_bound_with(&net, &cfg, &odd, kind, &space, direction, &opts)?;
            let witness_text = eb.bound.witness.describe(&net);
            let text = format!(
                "{}\nconditional: {}\nexplored: {}\n",
                render_witness(ctx.rendering, eb.bound.value, &witness_text),
                eb.conditional_at_witness
                    .map_or("-".into(), |p| ctx.rendering.format(p)),
                eb.bound.explored
            );
            let json = json!({
                "kind": eb.kind,
                "direction": eb.bound.direction,
                "value": eb.bound.value,
                "witness": eb.bound.witness,
                "witness_text": witness_text,
                "conditional_at_witness": eb.conditional_at_witness,
                "explored": eb.bound.explored,
            });
            Ok(Output::new(text, json))
        }
        Command::Whatif {
            model,
            sets,
            target,
            row,
        } => {
            let net = load_network(&model)?;
            let mut evidence_sets: Vec<Evidence> = match sets {
                Some(path) => parse_json(&read_text(&path)?)?,
                None => Vec::new(),
            };
            for r in &row {
                evidence_sets.push(pairs(r, Evidence::from_pairs)?);
            }
            if evidence_sets.is_empty() {
                evidence_sets.push(Evidence::new());
            }
            let targets: Vec<TargetRef> = target
                .into_iter()
                .map(|(v, s)| TargetRef::new(v, s))
                .collect();
            let rows = what_if_table(&net, &targets, &evidence_sets)?;
            let text = what_if_tsv(&net, &targets, &rows, ctx.rendering);
            Ok(Output::new(
                text,
                json!({ "targets": targets, "rows": rows }),
            ))
        }
        Command::Sensitivity {
            model,
            target,
            conditioning,
            candidates,
            cutoff,
        } => {
            let net = load_network(&model)?;
            let evidence = pairs(&conditioning.evidence, Evidence::from_pairs)?;
            let candidates = candidates.unwrap_or_else(|| {
                net.variables()
                    .iter()
                    .map(|v| v.name.clone())
                    .filter(|n| *n != target.0 && !evidence.contains(n))
                    .collect()
            });
            let entries = sensitivity_rank(&net, &target.0, &target.1, &candidates, &evidence)?;
            let suggested = suggest_features(&entries, cutoff);
            let mut text = sensitivity_tsv(&entries, ctx.rendering);
            let _ = writeln!(
                text,
                "suggested: {}",
                if suggested.is_empty() {
                    "none".to_string()
                } else {
                    suggested.join(",")
                }
            );
            let json = json!({
                "target": TargetRef::new(&target.0, &target.1),
                "cutoff": cutoff,
                "entries": entries,
                "suggested": suggested,
            });
            Ok(Output::new(text, json))
        }
        Command::Serve {
            models,
            port,
            host,
            static_dir,
            max_jobs,
            cors_origin,
        } => {
            if max_jobs == 0 {
                return Err(Failure::Usage("--max-jobs must be at least 1".into()));
            }
            let mut config = ServiceConfig::new(&models);
            config.static_dir = static_dir;
            config.max_jobs_per_model = max_jobs;
            config.limits = ctx.limits;
            config.cors_origin = cors_origin;
            let _ = tracing_subscriber::fmt()
                .with_writer(std::io::stderr)
                .try_init();
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| Failure::Io {
                    path: models.clone(),
                    message: e.to_string(),
                })?;
            runtime
                .block_on(intervene_service::serve(config, (host, port).into()))
                .map_err(|e| Failure::Io {
                    path: PathBuf::from(format!("{host}:{port}")),
                    message: e.to_string(),
                })?;
            Ok(Output::new(String::new(), Value::Null))
        }
    }
}

fn validate(model: &Path) -> Result<Output, Failure> {
    let text = read_text(model)?;
    let violations: Vec<(String, String, String)> = match NetworkDoc::from_json(&text) {
        Ok(doc) => validate_network(&doc)
            .into_iter()
            .map(|v| (v.variable, v.rule.code().to_string(), v.detail))
            .collect(),
        Err(e) => vec![("-".into(), e.code().into(), e.to_string())],
    };
    let mut out = String::new();
    for (var, rule, detail) in &violations {
        let _ = writeln!(out, "{var}\t{rule}\t{detail}");
    }
    let json: Vec<Value> = violations
        .iter()
        .map(|(var, rule, detail)| json!({ "variable": var, "rule": rule, "detail": detail }))
        .collect();
    let mut output = Output::new(
        out,
        json!({ "valid": violations.is_empty(), "violations": json }),
    );
    if !violations.is_empty() {
        output.exit_code = 1;
    }
    Ok(output)
}

fn query(
    ctx: &Context,
    model: &Path,
    target: (String, String),
    evidence: &[(String, String)],
    intervention: &[(String, String)],
    table: Option<&Path>,
) -> Result<Output, Failure> {
    let net = load_network(model)?;
    let table = risk_table(model, table)?;
    let req = QueryRequest {
        evidence: pairs(evidence, Evidence::from_pairs)?,
        intervention: pairs(intervention, DoAssignment::from_pairs)?,
        target: TargetRef::new(target.0, target.1),
    };
    let resp = run_query(&net, &table, &req)?;
    let text = format!(
        "{}\t{}\t{}\n",
        resp.target,
        ctx.rendering.format(resp.probability),
        resp.risk_group
    );
    Ok(Output::new(text, to_json(&resp)))
}
