//! The `affordance` command line. Payloads go to stdout as JSON,
//! diagnostics to stderr.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};

use affordance_transducer::dom_transducer::{
    transduce, ConfigError, PageAffordanceModel, TaskContext, TransduceError, TransducerConfig, TransducerSettings,
};
use affordance_transducer::html_ingest::TokenCount;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cognitive_map::{AffordanceQuery, CognitiveMap, HitKind, MapError};
use crate::protocol_client::{ClientError, ProtocolClient};
use crate::td_affordances::{parse_td_with, Mode, ParseOptions, Severity, TdError, TdViolation};
use crate::transport::{HttpLimits, UreqTransport};
use crate::wot_discovery::{
    fetch_page_via, fetch_td, find_td_links, list_things, DirectoryClient, DiscoveryError, TdCandidate,
};

/// Process exit codes.
///
/// | code | meaning |
/// |------|---------|
/// | 0 | success |
/// | 1 | internal error |
/// | 2 | bad input: missing or unreadable file, bad JSON argument, corrupt map |
/// | 3 | bad configuration file |
/// | 4 | Thing Description failed validation |
/// | 5 | network or HTTP protocol error |
/// | 6 | unknown Thing or affordance |
/// | 7 | value does not match the affordance's schema |
/// | 8 | no usable protocol binding, or unsupported operation |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Internal = 1,
    Input = 2,
    Config = 3,
    Invalid = 4,
    Network = 5,
    NotFound = 6,
    SchemaMismatch = 7,
    Unsupported = 8,
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
    pub details: Vec<String>,
}

impl Failure {
    fn new(exit: Exit, message: impl Into<String>) -> Self {
        Failure {
            exit,
            message: message.into(),
            details: Vec::new(),
        }
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        Failure::new(Exit::Input, e.to_string())
    }
}

impl From<DiscoveryError> for Failure {
    fn from(e: DiscoveryError) -> Self {
        let exit = match e {
            DiscoveryError::UnsupportedScheme(_) => Exit::Unsupported,
            DiscoveryError::InvalidConfig(_) => Exit::Input,
            _ => Exit::Network,
        };
        Failure::new(exit, e.to_string())
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let exit = match e {
            ClientError::NoSuchAffordance { .. } => Exit::NotFound,
            ClientError::SchemaMismatch { .. } => Exit::SchemaMismatch,
            ClientError::NoSupportedBinding { .. }
            | ClientError::ReadOnly(_)
            | ClientError::WriteOnly(_)
            | ClientError::UnsupportedOperation(_) => Exit::Unsupported,
            ClientError::Network(_) | ClientError::Protocol { .. } | ClientError::BodyTooLarge { .. } => Exit::Network,
        };
        Failure::new(exit, e.to_string())
    }
}

impl From<TdError> for Failure {
    fn from(e: TdError) -> Self {
        let mut f = Failure::new(Exit::Invalid, "invalid Thing Description");
        match e {
            TdError::Json { .. } => f.details.push(e.to_string()),
            TdError::Invalid { violations } => f.details.extend(violations.iter().map(describe)),
        }
        f
    }
}

fn describe(v: &TdViolation) -> String {
    let sev = match v.severity {
        Severity::Error => "error",
        Severity::Warning => "warning",
    };
    format!("{sev} {} [{}]: {}", display_path(&v.path), v.code.as_str(), v.message)
}

fn display_path(p: &str) -> &str {
    if p.is_empty() {
        "/"
    } else {
        p
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "affordance",
    version,
    about = "Perceive web pages and Web of Things devices as affordances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distill an HTML page into a page affordance model.
    Transduce(TransduceArgs),
    /// Parse a Thing Description into an affordance catalog.
    ParseTd(ParseTdArgs),
    /// Find Thing Descriptions and add them to a map file.
    Discover(DiscoverArgs),
    /// Invoke an action of a Thing in the map.
    Invoke(InvokeArgs),
    /// Read a property of a Thing in the map.
    Read(ReadArgs),
    /// Write a property of a Thing in the map.
    Write(WriteArgs),
    /// Inspect a map file.
    Map {
        #[command(subcommand)]
        command: MapCommand,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Pam,
    Compact,
    Stats,
}

#[derive(Debug, Args)]
pub struct TransduceArgs {
    /// HTML file, or an http(s) URL to fetch.
    #[arg(long)]
    pub input: String,
    /// What the agent is trying to do.
    #[arg(long)]
    pub task: String,
    /// Token budget for pruning; unlimited when absent.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Transducer settings, JSON or TOML.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pam")]
    pub emit: Emit,
    /// Page URL to record for a file input.
    #[arg(long)]
    pub source_url: Option<String>,
}

#[derive(Debug, Args)]
pub struct ParseTdArgs {
    /// Thing Description file, or an http(s) URL to fetch.
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct DiscoverSource {
    /// Base URL of a Thing Description Directory.
    #[arg(long, group = "source")]
    pub directory: Option<String>,
    /// A page affordance model, as written by `transduce`.
    #[arg(long, group = "source")]
    pub from_pam: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub source: DiscoverSource,
    /// Map file; created if absent.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct InvokeArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub thing: String,
    #[arg(long)]
    pub action: String,
    /// Action input as JSON.
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReadArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub thing: String,
    #[arg(long)]
    pub property: String,
}

#[derive(Debug, Args)]
pub struct WriteArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub thing: String,
    #[arg(long)]
    pub property: String,
    /// New value as JSON.
    #[arg(long)]
    pub input: String,
}

#[derive(Debug, Subcommand)]
pub enum MapCommand {
    /// Print every entry as a JSON array.
    Show {
        #[arg(long)]
        map: PathBuf,
    },
    /// Print matching index entries, one JSON object per line.
    Query {
        #[arg(long)]
        map: PathBuf,
        /// Case-insensitive substring of a name or label.
        #[arg(long)]
        text: Option<String>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<HitKind>,
        #[arg(long)]
        origin: Option<String>,
    },
}

fn parse_kind(s: &str) -> Result<HitKind, String> {
    HitKind::parse(s).ok_or_else(|| {
        let all: Vec<_> = HitKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("expected one of {}", all.join(", "))
    })
}

fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

fn read_input(path: &str) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::new(Exit::Input, format!("cannot read {path}: {e}")))
}

fn parse_json_arg(flag: &str, s: &str) -> Result<Value, Failure> {
    serde_json::from_str(s).map_err(|e| Failure::new(Exit::Input, format!("--{flag} is not JSON: {e}")))
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::new(Exit::Internal, e.to_string()))
}

fn load_map(path: &Path) -> Result<CognitiveMap, Failure> {
    Ok(CognitiveMap::load(path)?)
}

/// Warnings that do not stop a command.
pub type Notes = Vec<String>;

pub fn run(cli: Cli, out: &mut dyn Write, notes: &mut Notes) -> Result<(), Failure> {
    match cli.command {
        Command::Transduce(a) => cmd_transduce(a, out),
        Command::ParseTd(a) => cmd_parse_td(a, out, notes),
        Command::Discover(a) => cmd_discover(a, out, notes),
        Command::Invoke(a) => {
            let map = load_map(&a.map)?;
            let catalog = thing(&map, &a.thing)?;
            let input = a.input.as_deref().map(|s| parse_json_arg("input", s)).transpose()?;
            let r = ProtocolClient::default().invoke_action(catalog, &a.action, input.as_ref())?;
            print_json(out, &r)
        }
        Command::Read(a) => {
            let map = load_map(&a.map)?;
            let r = ProtocolClient::default().read_property(thing(&map, &a.thing)?, &a.property)?;
            print_json(out, &r)
        }
        Command::Write(a) => {
            let map = load_map(&a.map)?;
            let value = parse_json_arg("input", &a.input)?;
            let r = ProtocolClient::default().write_property(thing(&map, &a.thing)?, &a.property, &value)?;
            print_json(out, &r)
        }
        Command::Map { command } => cmd_map(command, out),
    }
}

fn thing<'m>(map: &'m CognitiveMap, id: &str) -> Result<&'m crate::td_affordances::AffordanceCatalog, Failure> {
    map.catalog(id)
        .ok_or_else(|| Failure::new(Exit::NotFound, format!("no Thing `{id}` in the map")))
}

fn cmd_transduce(a: TransduceArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut config: TransducerConfig = match &a.config {
        Some(p) => TransducerSettings::from_path(p)
            .map_err(|e: ConfigError| Failure::new(Exit::Config, e.to_string()))?
            .into(),
        None => TransducerConfig::default(),
    };
    if let Some(b) = a.budget {
        config = config.with_budget(TokenCount(b));
    }
    let (raw, source_url) = if is_url(&a.input) {
        let body = fetch_page_via(&UreqTransport::default(), &a.input, &HttpLimits::default())?;
        (body, Some(a.input.clone()))
    } else {
        (read_input(&a.input)?, a.source_url.clone())
    };
    let pam = transduce(&raw, source_url.as_deref(), &TaskContext::new(a.task), &config).map_err(|e| {
        let exit = match e {
            TransduceError::Summarizer(_) => Exit::Internal,
            _ => Exit::Input,
        };
        Failure::new(exit, e.to_string())
    })?;
    match a.emit {
        Emit::Pam => print_json(out, &pam),
        Emit::Stats => print_json(out, &pam.stats),
        Emit::Compact => writeln!(out, "{}", pam.compact.text).map_err(|e| Failure::new(Exit::Internal, e.to_string())),
    }
}

fn mode(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Lenient
    }
}

fn cmd_parse_td(a: ParseTdArgs, out: &mut dyn Write, notes: &mut Notes) -> Result<(), Failure> {
    let mode = mode(a.strict);
    let (text, options) = if is_url(&a.input) {
        let fetched = fetch_td(&a.input, &HttpLimits::default())?;
        let opts = fetched.parse_options(mode);
        (fetched.text, opts)
    } else {
        let bytes = read_input(&a.input)?;
        let text = String::from_utf8(bytes).map_err(|e| Failure::new(Exit::Input, format!("{}: {e}", a.input)))?;
        (text, ParseOptions::new(mode))
    };
    let parsed = parse_td_with(&text, &options)?;
    notes.extend(parsed.warnings.iter().map(describe));
    print_json(out, &parsed.catalog)
}

#[derive(Serialize)]
struct Upserted {
    thing_id: String,
    url: Option<String>,
    affordances: usize,
    revision: u64,
}

#[derive(Serialize)]
struct Failed {
    source: String,
    error: String,
}

fn cmd_discover(a: DiscoverArgs, out: &mut dyn Write, notes: &mut Notes) -> Result<(), Failure> {
    let mode = mode(a.strict);
    let mut map = if a.map.exists() {
        load_map(&a.map)?
    } else {
        CognitiveMap::new()
    };
    let mut upserted = Vec::new();
    let mut failed = Vec::new();
    let mut added = 0usize;
    let mut found = 0usize;
    let mut add = |map: &mut CognitiveMap,
                   text: &str,
                   opts: ParseOptions,
                   url: Option<String>,
                   failed: &mut Vec<Failed>,
                   notes: &mut Notes| {
        let label = url.clone().unwrap_or_else(|| "directory entry".into());
        match parse_td_with(text, &opts) {
            Ok(parsed) => {
                notes.extend(parsed.warnings.iter().map(|w| format!("{label}: {}", describe(w))));
                let c = parsed.catalog;
                let (id, n) = (c.thing_id.clone(), c.affordance_count());
                match map.upsert_catalog(c) {
                    Ok(revision) => {
                        let diff = map.get(&id).and_then(|e| e.last_diff.clone()).unwrap_or_default();
                        added += diff.added.properties.len() + diff.added.actions.len() + diff.added.events.len();
                        upserted.push(Upserted {
                            thing_id: id,
                            url,
                            affordances: n,
                            revision,
                        });
                    }
                    Err(e) => failed.push(Failed {
                        source: label,
                        error: e.to_string(),
                    }),
                }
            }
            Err(e) => failed.push(Failed {
                source: label,
                error: Failure::from(e).details.join("; "),
            }),
        }
    };
    if let Some(dir) = &a.source.directory {
        let base = url::Url::parse(dir).map_err(|e| Failure::new(Exit::Input, format!("--directory: {e}")))?;
        let items = list_things(&DirectoryClient::new(base))?;
        found = items.len();
        for item in items {
            add(&mut map, &item, ParseOptions::new(mode), None, &mut failed, notes);
        }
    } else if let Some(path) = &a.source.from_pam {
        let pam: PageAffordanceModel = serde_json::from_slice(&read_input(&path.to_string_lossy())?).map_err(|e| {
            Failure::new(
                Exit::Input,
                format!("{}: not a page affordance model: {e}", path.display()),
            )
        })?;
        let candidates: Vec<TdCandidate> = find_td_links(&pam);
        found = candidates.len();
        if pam.source_url.is_some() {
            map.upsert_pam(pam)?;
        } else {
            notes.push("page model has no source_url; only absolute links were followed".into());
        }
        for c in candidates {
            match fetch_td(&c.url, &HttpLimits::default()) {
                Ok(f) => {
                    let opts = f.parse_options(mode);
                    add(&mut map, &f.text, opts, Some(c.url.clone()), &mut failed, notes)
                }
                Err(e) => failed.push(Failed {
                    source: c.url,
                    error: e.to_string(),
                }),
            }
        }
    }
    map.persist(&a.map)?;
    for f in &failed {
        notes.push(format!("{}: {}", f.source, f.error));
    }
    print_json(
        out,
        &json!({
            "things_found": found,
            "upserted": upserted,
            "affordances_added": added,
            "failed": failed,
            "map_version": map.version(),
        }),
    )
}

fn cmd_map(command: MapCommand, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        MapCommand::Show { map } => {
            let map = load_map(&map)?;
            let entries: Vec<_> = map.entries().values().collect();
            print_json(out, &entries)
        }
        MapCommand::Query {
            map,
            text,
            kind,
            origin,
        } => {
            let map = load_map(&map)?;
            let q = AffordanceQuery { text, kind, origin };
            if q.is_empty() {
                return Err(Failure::new(Exit::Input, "map query needs --text, --kind or --origin"));
            }
            for hit in map.query(&q)? {
                let line = serde_json::to_string(&hit).map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
                writeln!(out, "{line}").map_err(|e| Failure::new(Exit::Internal, e.to_string()))?;
            }
            Ok(())
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                Exit::Input as u8
            } else {
                Exit::Ok as u8
            };
        }
    };
    let color = io::stderr().is_terminal() && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
    let paint = |label: &str, code: &str| {
        if color {
            format!("\x1b[{code}m{label}\x1b[0m")
        } else {
            label.to_string()
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut notes = Notes::new();
    let result = run(cli, &mut out, &mut notes);
    let _ = out.flush();
    let mut err = io::stderr().lock();
    for n in &notes {
        let _ = writeln!(err, "{} {n}", paint("note:", "33"));
    }
    match result {
        Ok(()) => Exit::Ok as u8,
        Err(f) => {
            let _ = writeln!(err, "{} {}", paint("error:", "31"), f.message);
            for d in &f.details {
                let _ = writeln!(err, "  {d}");
            }
            f.exit as u8
        }
    }
}
