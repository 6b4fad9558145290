//! `statejar`: command-line front end for the cookie engine.
//!
//! Exit codes: 0 success, 1 Reject / `--expect` mismatch / corpus failure,
//! 2 header parse error, 64 bad usage, 65 malformed input data, 66 unreadable
//! input.

mod config;
mod corpus;
mod dump;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use statejar::header::{parse_set_cookie, serialize_cookie_header, Mode};
use statejar::jar::StoredCookie;
use statejar::policy::{classify_transaction, evaluate_accept, evaluate_send, is_third_party, OriginTransaction, Trigger, Verifiability};
use statejar::sim::{format_trace, run_exchange, ExchangeScript, SimEnv, SIM_EPOCH};
use statejar::{CookieSpec, DomainPattern, FixedClock, Jar, RequestContext, UnixTime};

use config::PolicyFile;
use dump::{parse_dump, Dump, MatchInputError, ParseMode};

const EXIT_REJECT: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NOINPUT: u8 = 66;

const JAR_FILE_NAME: &str = "cookies.txt";

#[derive(Parser)]
#[command(name = "statejar", version, about = "HTTP cookie engine: parse, match, store, and simulate cookie exchanges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one header value and print its fields.
    Parse {
        #[arg(long, value_enum, default_value = "v0")]
        mode: ParseMode,
        #[arg(allow_hyphen_values = true)]
        header: String,
    },
    /// Check a Domain attribute against the host that sent it.
    Match {
        /// Netscape rules (period counting).
        #[arg(long, conflicts_with = "v1")]
        v0: bool,
        /// Set-Cookie2 rules (the default).
        #[arg(long)]
        v1: bool,
        host: String,
        domain: String,
    },
    /// Work with a cookie file.
    Jar(JarArgs),
    /// Evaluate the privacy policy.
    Policy {
        #[command(subcommand)]
        command: PolicyCommand,
    },
    /// Run an exchange script and write its trace.
    Simulate(SimulateArgs),
    /// Run every *.case file in a directory.
    Corpus { dir: PathBuf },
}

#[derive(Args)]
struct JarArgs {
    /// Cookie file (default: $STATEJAR_HOME/cookies.txt).
    #[arg(long, global = true)]
    jar: Option<PathBuf>,
    /// Current time in seconds since the Unix epoch.
    #[arg(long, global = true, default_value_t = SIM_EPOCH)]
    now: UnixTime,
    #[command(subcommand)]
    command: JarCommand,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetMode {
    V0,
    V1,
}

#[derive(Subcommand)]
enum JarCommand {
    /// Store the cookies of a Set-Cookie (or Set-Cookie2) header received from URL.
    Store {
        url: String,
        #[arg(allow_hyphen_values = true)]
        header: String,
        #[arg(long, value_enum, default_value = "v0")]
        mode: SetMode,
    },
    /// Print the cookies that would be sent to URL, and the Cookie header.
    Select { url: String },
    /// Write the jar, minus expired cookies, to OUT (or stdout).
    Save { out: Option<PathBuf> },
    /// Replace the jar with the contents of a cookie file.
    Load { file: PathBuf },
    /// Drop session and Discard cookies.
    EndSession,
}

#[derive(Subcommand)]
enum PolicyCommand {
    /// Decide whether a cookie may be accepted from, and sent to, URL.
    Eval {
        url: String,
        /// Policy file.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Use this client's entries from the policy file.
        #[arg(long, requires = "policy")]
        client: Option<String>,
        /// URL of the origin transaction; makes the request unverifiable.
        #[arg(long)]
        from: Option<String>,
        #[arg(long, requires = "from", value_parser = parse_trigger, default_value = "inline")]
        trigger: Trigger,
        /// Domain attribute of a cookie in the origin transaction.
        #[arg(long = "origin-domain", requires = "from")]
        origin_domains: Vec<String>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    script: PathBuf,
    /// Cookie file every client starts with, or CLIENT=FILE for one client.
    #[arg(long)]
    jar: Vec<String>,
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Compare the trace with a golden file; exit 1 on any difference.
    #[arg(long)]
    expect: Option<PathBuf>,
    /// Simulation start time in seconds since the Unix epoch.
    #[arg(long, default_value_t = SIM_EPOCH)]
    now: UnixTime,
}

fn parse_trigger(text: &str) -> Result<Trigger, String> {
    Trigger::parse(text).ok_or_else(|| "expected inline, redirect or form".to_string())
}

/// A failed command: exit code plus a diagnostic for stderr.
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn new(code: u8, message: impl Into<String>) -> Fail {
        Fail {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::new(EXIT_NOINPUT, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    std::fs::write(path, text).map_err(|e| Fail::new(EXIT_NOINPUT, format!("{}: {e}", path.display())))
}

fn request_context(url: &str) -> Result<RequestContext, Fail> {
    RequestContext::from_url(url).map_err(|e| Fail::new(EXIT_USAGE, e.to_string()))
}

fn cmd_parse(mode: ParseMode, header: &str) -> CmdResult {
    match parse_dump(mode, header) {
        Ok(dump) => {
            print!("{dump}");
            Ok(0)
        }
        Err(e) => {
            println!("error={}", e.class());
            Err(Fail::new(EXIT_PARSE, e.to_string()))
        }
    }
}

fn cmd_match(v0: bool, host: &str, domain: &str) -> CmdResult {
    let verdict = dump::match_verdict(!v0, host, domain).map_err(|e| match e {
        MatchInputError::Host(_) | MatchInputError::Domain(_) => Fail::new(EXIT_USAGE, e.to_string()),
    })?;
    println!("{verdict}");
    Ok(if verdict.is_accept() { 0 } else { EXIT_REJECT })
}

fn jar_path(explicit: Option<PathBuf>) -> Result<PathBuf, Fail> {
    if let Some(p) = explicit {
        return Ok(p);
    }
    match std::env::var_os("STATEJAR_HOME") {
        Some(home) if !home.is_empty() => Ok(PathBuf::from(home).join(JAR_FILE_NAME)),
        _ => Err(Fail::new(EXIT_USAGE, "no jar: pass --jar or set STATEJAR_HOME")),
    }
}

fn load_jar(text: &str, clock: Arc<FixedClock>, origin: &Path) -> Result<Jar, Fail> {
    Jar::load(text, clock).map_err(|e| Fail::new(EXIT_DATA, format!("{}: {e}", origin.display())))
}

/// The jar at `path`; a missing file is an empty jar.
fn open_jar(path: &Path, clock: Arc<FixedClock>) -> Result<Jar, Fail> {
    match std::fs::read_to_string(path) {
        Ok(text) => load_jar(&text, clock, path),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Jar::new(clock)),
        Err(e) => Err(Fail::new(EXIT_NOINPUT, format!("{}: {e}", path.display()))),
    }
}

fn push_stored(out: &mut Dump, prefix: &str, c: &StoredCookie) {
    out.push(format!("{prefix}.name"), &c.spec.name);
    out.push(format!("{prefix}.value"), &c.spec.value);
    out.push(format!("{prefix}.domain"), &c.effective_domain);
    out.push(format!("{prefix}.path"), &c.effective_path);
    out.push(format!("{prefix}.version"), c.spec.version);
    out.push(format!("{prefix}.session"), c.is_session || c.spec.discard);
}

fn cmd_jar(args: JarArgs) -> CmdResult {
    let path = jar_path(args.jar)?;
    let clock = Arc::new(FixedClock(args.now));
    let mut out = Dump::default();
    match args.command {
        JarCommand::Store { url, header, mode } => {
            let ctx = request_context(&url)?;
            let mode = match mode {
                SetMode::V0 => Mode::V0,
                SetMode::V1 => Mode::V1,
            };
            let specs: Vec<CookieSpec> = parse_set_cookie(&header, mode).map_err(|e| {
                println!("error={}", e.class());
                Fail::new(EXIT_PARSE, e.to_string())
            })?;
            let mut jar = open_jar(&path, clock)?;
            for (i, spec) in specs.into_iter().enumerate() {
                out.push(format!("cookie.{i}.name"), &spec.name);
                out.push(format!("cookie.{i}.result"), jar.store(spec, &ctx));
            }
            write(&path, &jar.save())?;
        }
        JarCommand::Select { url } => {
            let ctx = request_context(&url)?;
            let jar = open_jar(&path, clock)?;
            let selected = jar.select(&ctx, args.now);
            let version = u32::from(selected.iter().any(|c| c.spec.version >= 1));
            out.push("cookies", selected.len());
            for (i, c) in selected.iter().enumerate() {
                push_stored(&mut out, &format!("cookie.{i}"), c);
            }
            out.push("header", serialize_cookie_header(&selected, version));
        }
        JarCommand::Save { out: target } => {
            let mut jar = open_jar(&path, clock)?;
            let purged = jar.purge_expired(args.now);
            let text = jar.save();
            match target {
                Some(target) => {
                    write(&target, &text)?;
                    out.push("purged", purged);
                    out.push("cookies", jar.len());
                }
                None => print!("{text}"),
            }
        }
        JarCommand::Load { file } => {
            let jar = load_jar(&read(&file)?, clock, &file)?;
            write(&path, &jar.save())?;
            out.push("cookies", jar.len());
            for (i, c) in jar.iter().enumerate() {
                out.push(format!("cookie.{i}.key"), c.key());
            }
        }
        JarCommand::EndSession => {
            let mut jar = open_jar(&path, clock)?;
            out.push("removed", jar.end_session());
            write(&path, &jar.save())?;
        }
    }
    print!("{out}");
    Ok(0)
}

fn read_policy(path: &Path) -> Result<PolicyFile, Fail> {
    PolicyFile::parse(&read(path)?).map_err(|e| Fail::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn cmd_policy(command: PolicyCommand) -> CmdResult {
    let PolicyCommand::Eval {
        url,
        policy,
        client,
        from,
        trigger,
        origin_domains,
    } = command;
    let file = match &policy {
        Some(p) => read_policy(p)?,
        None => PolicyFile::default(),
    };
    let cfg = match &client {
        Some(id) => file.clients.get(id).copied().unwrap_or(file.default),
        None => file.default,
    };
    let mut ctx = request_context(&url)?;
    if let Some(from) = from {
        let origin = request_context(&from)?;
        let cookie_domains = origin_domains
            .iter()
            .map(|d| DomainPattern::parse(d).map_err(|e| Fail::new(EXIT_USAGE, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        ctx = ctx.derived_from(
            OriginTransaction {
                host: origin.host,
                cookie_domains,
            },
            trigger,
        );
    }
    let mut out = Dump::default();
    let verifiable = classify_transaction(&ctx) == Verifiability::Verifiable;
    out.push("transaction", if verifiable { "verifiable" } else { "unverifiable" });
    if let Ok(third) = is_third_party(&ctx) {
        out.push("third_party", third);
    }
    // the decision does not depend on the cookie itself
    out.push("accept", evaluate_accept(&cfg, &ctx, &CookieSpec::new("n", "v", 0)));
    out.push("send", format!("{:?}", evaluate_send(&cfg, &ctx)));
    print!("{out}");
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let text = read(&args.script)?;
    let script = ExchangeScript::parse(&text).map_err(|e| {
        println!("error=ScriptError");
        if let Some(step) = e.step {
            println!("step={step}");
        }
        if let Some(line) = e.line {
            println!("line={line}");
        }
        Fail::new(EXIT_DATA, format!("{}: {e}", args.script.display()))
    })?;

    let mut env = SimEnv::new(args.now);
    if let Some(p) = &args.policy {
        let file = read_policy(p)?;
        for id in file.clients.keys() {
            if !script.clients.iter().any(|c| &c.id == id) {
                eprintln!("warning: policy names client {id}, which the script does not declare");
            }
        }
        env.default_policy = file.default;
        env.policies = file.clients;
    }
    for seed in &args.jar {
        let (clients, file): (Vec<&str>, &str) = match seed.split_once('=') {
            Some((id, file)) if script.clients.iter().any(|c| c.id == id) => (vec![id], file),
            _ => (script.clients.iter().map(|c| c.id.as_str()).collect(), seed.as_str()),
        };
        let file = Path::new(file);
        let jar = Jar::load(&read(file)?, env.clock.clone())
            .map_err(|e| Fail::new(EXIT_DATA, format!("{}: {e}", file.display())))?;
        for id in clients {
            env.jars.insert(id.to_string(), jar.clone());
        }
    }

    let events = run_exchange(&script, &mut env).map_err(|e| {
        println!("error=ExchangeError");
        println!("step={}", e.step);
        Fail::new(EXIT_DATA, format!("{}: {e}", args.script.display()))
    })?;
    let trace = format_trace(&events);
    match &args.trace {
        Some(path) => write(path, &trace)?,
        None => print!("{trace}"),
    }

    if let Some(golden) = &args.expect {
        let want = read(golden)?;
        if want != trace {
            let diff = similar::TextDiff::from_lines(&want, &trace);
            eprint!(
                "{}",
                diff.unified_diff()
                    .context_radius(2)
                    .header(&golden.display().to_string(), "actual")
            );
            return Err(Fail::new(EXIT_REJECT, format!("trace differs from {}", golden.display())));
        }
    }
    Ok(0)
}

fn cmd_corpus(dir: &Path) -> CmdResult {
    let report = corpus::run_corpus(dir).map_err(|e| match e {
        corpus::CorpusError::Unreadable(..) => Fail::new(EXIT_NOINPUT, e.to_string()),
        corpus::CorpusError::Malformed(..) => Fail::new(EXIT_DATA, e.to_string()),
    })?;
    if report.cases == 0 {
        eprintln!("warning: no *.case files with cases in {}", dir.display());
    }
    for (file, id, reason) in &report.failures {
        println!("FAIL {file} {id}: {}", dump::escape(reason));
    }
    let failed = report.failures.len();
    println!("cases={} passed={} failed={failed}", report.cases, report.cases - failed);
    Ok(if failed == 0 { 0 } else { EXIT_REJECT })
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Parse { mode, header } => cmd_parse(mode, &header),
        Command::Match { v0, host, domain, .. } => cmd_match(v0, &host, &domain),
        Command::Jar(args) => cmd_jar(args),
        Command::Policy { command } => cmd_policy(command),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Corpus { dir } => cmd_corpus(&dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(fail) => {
            eprintln!("statejar: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
