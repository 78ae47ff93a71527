use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;

use rsdcert::axioms::{analyze_support, is_degenerate, is_near_unanimous, is_supported_profile};
use rsdcert::efficiency::analyze_efficiency;
use rsdcert::mechanisms::{check_eta, check_expe, check_sp, RandomSerialDictatorship};
use rsdcert::prefs::{all_swaps, enumerate_profiles, profile_count};
use rsdcert::verifier::{replay_certificate, verify_with, Reason, RoundStats, Universe, Verdict, VerifyOptions};
use rsdcert::{rsd, Error, House, Profile};

const EXIT_UNDERDETERMINED: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 10;
const EXIT_PARSE: u8 = 11;
const EXIT_USAGE: u8 = 12;

/// Exact verification of random serial dictatorship's characterisation by
/// ex-post efficiency, equal treatment for all and strategy-proofness.
#[derive(Parser, Debug)]
#[command(name = "rsdcert", version)]
struct Cli {
    /// Worker threads: a positive number or "auto".
    #[arg(long, global = true, default_value = "auto")]
    threads: Threads,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the determination engine over every profile of the given size.
    Verify(VerifyArgs),
    /// Print the exact RSD matrix of a profile.
    Rsd(ProfileArgs),
    /// Print the disagreement parameter, support and efficiency data of a profile.
    Classify(ProfileArgs),
    /// Print and replay the determination certificate of a profile.
    Certify(ProfileArgs),
    /// Check that RSD satisfies the axioms on all or on sampled profiles.
    CheckAxioms(CheckArgs),
    /// List canonical profiles with their disagreement parameter and orbit size.
    Enumerate(SizeArgs),
}

#[derive(Args, Debug)]
struct SizeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// JSONL report, one record per canonical profile.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-level CSV summary.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Suppress per-round progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Rankings joined by '|', e.g. "abcd|bacd|abdc|dcba".
    #[arg(long)]
    profile: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Check every profile instead of a sample.
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, Debug)]
enum Threads {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k > 0 => Ok(Threads::Fixed(k)),
            _ => Err(format!("expected a positive integer or \"auto\", got \"{s}\"")),
        }
    }
}

/// A failure carrying its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Fail {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Fail::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MalformedLetter { .. }
            | Error::DuplicateHouse { .. }
            | Error::InconsistentLength { .. }
            | Error::EmptyProfile
            | Error::NoHouses => EXIT_PARSE,
            Error::TooManyHouses(_)
            | Error::EnumerationTooLarge { .. }
            | Error::MoreAgentsThanHouses { .. }
            | Error::SizeGuard { .. } => EXIT_USAGE,
            _ => 1,
        };
        Fail::new(code, e.to_string())
    }
}

fn stdout_io(e: io::Error) -> Fail {
    Fail::new(EXIT_IO, format!("stdout: {e}"))
}

type Outcome = Result<u8, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = match cli.threads {
        Threads::Auto => 0,
        Threads::Fixed(k) => k,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("rsdcert: thread pool: {e}");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Rsd(a) => cmd_rsd(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Certify(a) => cmd_certify(a),
        Command::CheckAxioms(a) => cmd_check_axioms(a),
        Command::Enumerate(a) => cmd_enumerate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("rsdcert: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Relative output paths are placed under `RSDCERT_OUT_DIR` when it is set.
fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os("RSDCERT_OUT_DIR") {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn create(path: &Path) -> Result<(PathBuf, BufWriter<File>), Fail> {
    let path = output_path(path);
    if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Fail::io(parent, e))?;
    }
    let file = File::create(&path).map_err(|e| Fail::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn parse_profile_arg(a: &ProfileArgs) -> Result<Profile, Fail> {
    let p: Profile = a.profile.parse()?;
    for (flag, want, got) in [("--n", a.n, p.n()), ("--m", a.m, p.m())] {
        if let Some(want) = want {
            if want != got {
                return Err(Fail::new(
                    EXIT_PARSE,
                    format!("profile \"{}\" has {flag} {got}, but {want} was given", a.profile),
                ));
            }
        }
    }
    Ok(p)
}

fn exit_for(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::AllEqualRsd => 0,
        Verdict::SomeUnderdetermined => EXIT_UNDERDETERMINED,
        Verdict::SomeInfeasibleOrDiffers => EXIT_INFEASIBLE,
    }
}

fn print_progress(s: &RoundStats) {
    eprintln!(
        "round {:>3}{}: {:>6} new entries, {}/{} profiles complete",
        s.round,
        if s.box_probe { " (bounds)" } else { "" },
        s.new_entries,
        s.complete_profiles,
        s.total_profiles
    );
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let (n, m) = (a.size.n, a.size.m);
    let start = Instant::now();
    let progress: &(dyn Fn(&RoundStats) + Sync) = &print_progress;
    let options = VerifyOptions {
        progress: (!a.quiet).then_some(progress),
    };
    let report = verify_with(n, m, &options)?;
    if !a.quiet {
        eprintln!(
            "{} canonical profiles, {} rounds, {:.2}s",
            report.records().len(),
            report.rounds(),
            start.elapsed().as_secs_f64()
        );
    }
    if let Some(out) = &a.out {
        let (path, w) = create(out)?;
        report.write_jsonl(w).map_err(|e| Fail::io(&path, e))?;
    }
    if let Some(summary) = &a.summary {
        let (path, w) = create(summary)?;
        report.write_summary_csv(w).map_err(|e| Fail::io(&path, e))?;
    }
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match a.size.format {
        Format::Csv => report.write_summary_csv(&mut w).map_err(stdout_io)?,
        Format::Json => {
            serde_json::to_writer(&mut w, &report.summary()).map_err(|e| stdout_io(e.into()))?;
            writeln!(w).map_err(stdout_io)?;
        }
        Format::Pretty => {
            writeln!(
                w,
                "{:>5} {:>9} {:>9} {:>7} {:>7} {:>8} {:>7} {:>6}",
                "D", "profiles", "orbit", "unique", "differs", "underdet", "infeas", "round"
            )
            .map_err(stdout_io)?;
            for s in report.summary() {
                writeln!(
                    w,
                    "{:>5} {:>9} {:>9} {:>7} {:>7} {:>8} {:>7} {:>6}",
                    s.level,
                    s.profiles,
                    s.orbit_profiles,
                    s.unique,
                    s.differs,
                    s.underdetermined,
                    s.infeasible,
                    s.max_round
                )
                .map_err(stdout_io)?;
            }
            let orbit: u64 = report.records().iter().map(|r| r.orbit_size).sum();
            let verdict = match report.verdict() {
                Verdict::AllEqualRsd => "every profile is determined and equals RSD",
                Verdict::SomeUnderdetermined => "some profiles are underdetermined",
                Verdict::SomeInfeasibleOrDiffers => "some profiles are infeasible or determined differently from RSD",
            };
            writeln!(w, "{} profiles in {} orbits: {verdict}", orbit, report.records().len()).map_err(stdout_io)?;
        }
    }
    Ok(exit_for(report.verdict()))
}

fn cmd_rsd(a: &ProfileArgs) -> Outcome {
    let p = parse_profile_arg(a)?;
    let matrix = rsd(&p)?;
    let text = match a.format {
        Format::Pretty => matrix.to_string(),
        Format::Json => serde_json::to_string(&matrix).expect("matrices serialize") + "\n",
        Format::Csv => {
            let mut s = String::from("agent");
            for h in House::all(p.m()) {
                s.push(',');
                s.push(h.letter());
            }
            s.push('\n');
            for i in 0..p.n() {
                let row: Vec<String> = matrix.row(i).iter().map(ToString::to_string).collect();
                s.push_str(&format!("{},{}\n", i + 1, row.join(",")));
            }
            s
        }
    };
    io::stdout().write_all(text.as_bytes()).map_err(stdout_io)?;
    Ok(0)
}

fn cmd_classify(a: &ProfileArgs) -> Outcome {
    let p = parse_profile_arg(a)?;
    let eff = analyze_efficiency(&p)?;
    let forced: Vec<String> = eff
        .forced_zero_cells()
        .into_iter()
        .map(|(i, h)| format!("({},{})", i + 1, h.letter()))
        .collect();
    let pair = |(x, y): (House, House)| format!("{}{}", x.letter(), y.letter());
    let agents = if p.n() == 4 {
        (0..4)
            .map(|i| analyze_support(&p, i, &eff))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };
    let supported = if p.n() == 4 {
        Some(is_supported_profile(&p)?)
    } else {
        None
    };
    let d = p.disagreement_parameter();
    let near = is_near_unanimous(&p);
    let degenerate = is_degenerate(&p);
    let text = match a.format {
        Format::Json => {
            let agents: Vec<serde_json::Value> = agents
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    serde_json::json!({
                        "agent": i + 1,
                        "supported": s.supported,
                        "relaxation": s.relaxation.map(pair),
                        "blocking": s.blocking.iter().copied().map(pair).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let v = serde_json::json!({
                "profile": p.to_string(),
                "D": d,
                "agents": agents,
                "supported": supported,
                "near_unanimous": near,
                "degenerate": degenerate,
                "forced_zeros": forced,
            });
            v.to_string() + "\n"
        }
        Format::Csv => {
            let flag = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
            let agent_flags: Vec<String> = (0..4).map(|i| flag(agents.get(i).map(|s| s.supported))).collect();
            format!(
                "profile,D,supported,agent1,agent2,agent3,agent4,near_unanimous,degenerate,forced_zeros\n{},{},{},{},{},{},{}\n",
                p,
                d,
                flag(supported),
                agent_flags.join(","),
                near,
                degenerate,
                forced.join(" ")
            )
        }
        Format::Pretty => {
            let mut s = format!("profile          {p}\nD                {d}\n");
            for (i, a) in agents.iter().enumerate() {
                let detail = if a.supported {
                    a.relaxation
                        .map_or(String::new(), |r| format!(" (relaxing {})", pair(r)))
                } else {
                    let pairs: Vec<String> = a.blocking.iter().copied().map(pair).collect();
                    format!(" (blocked by {})", pairs.join(", "))
                };
                s.push_str(&format!(
                    "agent {}          {}{detail}\n",
                    i + 1,
                    if a.supported { "supported" } else { "unsupported" }
                ));
            }
            if let Some(b) = supported {
                s.push_str(&format!("supported        {b}\n"));
            }
            s.push_str(&format!("near-unanimous   {near}\ndegenerate       {degenerate}\n"));
            s.push_str(&format!(
                "forced zeros     {}\n",
                if forced.is_empty() {
                    "none".into()
                } else {
                    forced.join(" ")
                }
            ));
            s
        }
    };
    io::stdout().write_all(text.as_bytes()).map_err(stdout_io)?;
    Ok(0)
}

fn cmd_certify(a: &ProfileArgs) -> Outcome {
    let p = parse_profile_arg(a)?;
    let report = verify_with(p.n(), p.m(), &VerifyOptions::default())?;
    let cert = match report.certificate_for(&p) {
        Ok(c) => c,
        Err(Error::NotDetermined(_)) => {
            let outcome = report
                .record_for(&p)
                .map(|r| format!("{:?}", r.outcome))
                .unwrap_or_default();
            eprintln!("rsdcert: {p} is not determined: {outcome}");
            return Ok(EXIT_UNDERDETERMINED);
        }
        Err(e) => return Err(e.into()),
    };
    let replay = replay_certificate(&cert, report.database());
    let stdout = io::stdout();
    let mut w = stdout.lock();
    match a.format {
        Format::Json => {
            serde_json::to_writer(&mut w, &cert).map_err(|e| stdout_io(e.into()))?;
            writeln!(w).map_err(stdout_io)?;
        }
        Format::Csv => {
            writeln!(w, "cell,value,round,reason").map_err(stdout_io)?;
            for s in &cert.steps {
                writeln!(w, "\"{}\",{},{},{}", s.cell, s.value, s.round, s.reason.tag()).map_err(stdout_io)?;
            }
        }
        Format::Pretty => {
            writeln!(w, "profile {}", cert.profile).map_err(stdout_io)?;
            for s in &cert.steps {
                let detail = match &s.reason {
                    Reason::Eta { partner } => format!(" = {partner}"),
                    Reason::SpImport { import, partner } => {
                        let via = partner.map_or(String::new(), |c| format!(", minus {c}"));
                        format!(
                            " from {} (D={}, round {}){via}",
                            import.source, import.level, import.round
                        )
                    }
                    Reason::HouseComplement { shared } if !shared.is_empty() => {
                        let cells: Vec<String> = shared.iter().map(ToString::to_string).collect();
                        format!(" shared with {}", cells.join(" "))
                    }
                    Reason::SolvedJointly { system } => format!(" system {system}"),
                    _ => String::new(),
                };
                writeln!(
                    w,
                    "{:>6} = {:<6} round {:>2}  {}{detail}",
                    s.cell.to_string(),
                    s.value.to_string(),
                    s.round,
                    s.reason.tag()
                )
                .map_err(stdout_io)?;
            }
            write!(w, "{}", cert.final_matrix).map_err(stdout_io)?;
            match &replay {
                Ok(()) => writeln!(w, "replay: ok"),
                Err(e) => writeln!(w, "replay: FAILED: {e}"),
            }
            .map_err(stdout_io)?;
        }
    }
    match replay {
        Ok(()) => Ok(0),
        Err(e) => {
            eprintln!("rsdcert: replay failed: {e}");
            Ok(EXIT_INFEASIBLE)
        }
    }
}

#[derive(Default, Clone, Copy)]
struct AxiomTally {
    profiles: usize,
    expe: usize,
    eta: usize,
    sp_checks: usize,
    sp: usize,
}

impl AxiomTally {
    fn add(self, o: AxiomTally) -> AxiomTally {
        AxiomTally {
            profiles: self.profiles + o.profiles,
            expe: self.expe + o.expe,
            eta: self.eta + o.eta,
            sp_checks: self.sp_checks + o.sp_checks,
            sp: self.sp + o.sp,
        }
    }

    fn all_pass(&self) -> bool {
        self.expe == self.profiles && self.eta == self.profiles && self.sp == self.sp_checks
    }
}

fn check_one(p: &Profile) -> Result<AxiomTally, Error> {
    let mech = RandomSerialDictatorship;
    let mut t = AxiomTally {
        profiles: 1,
        expe: check_expe(&mech, p)? as usize,
        eta: check_eta(&mech, p) as usize,
        ..AxiomTally::default()
    };
    for s in all_swaps(p.n(), p.m()) {
        t.sp_checks += 1;
        t.sp += check_sp(&mech, p, s)? as usize;
    }
    Ok(t)
}

fn random_profile(rng: &mut StdRng, n: usize, m: usize) -> Profile {
    let rows: Vec<String> = (0..n)
        .map(|_| {
            let mut houses: Vec<char> = House::all(m).map(House::letter).collect();
            houses.shuffle(rng);
            houses.into_iter().collect()
        })
        .collect();
    rows.join("|").parse().expect("shuffled rankings are valid")
}

fn cmd_check_axioms(a: &CheckArgs) -> Outcome {
    let (n, m) = (a.size.n, a.size.m);
    if n == 0 {
        return Err(Error::EmptyProfile.into());
    }
    if n > m {
        return Err(Error::MoreAgentsThanHouses { n, m }.into());
    }
    let profiles: Vec<Profile> = if a.exhaustive {
        let count = profile_count(n, m);
        const LIMIT: u128 = 400_000;
        if count > LIMIT {
            return Err(Error::EnumerationTooLarge { count, limit: LIMIT }.into());
        }
        enumerate_profiles(n, m)?.collect()
    } else {
        if a.samples == 0 {
            return Err(Fail::new(EXIT_USAGE, "--samples must be positive"));
        }
        if m > 6 {
            return Err(Error::TooManyHouses(m).into());
        }
        let mut rng = StdRng::seed_from_u64(a.seed);
        (0..a.samples).map(|_| random_profile(&mut rng, n, m)).collect()
    };
    let tally = profiles
        .par_iter()
        .map(check_one)
        .try_reduce(AxiomTally::default, |x, y| Ok(x.add(y)))?;
    let verdict = if tally.all_pass() { "pass" } else { "FAIL" };
    let text = match a.size.format {
        Format::Json => {
            serde_json::json!({
                "n": n, "m": m,
                "profiles": tally.profiles,
                "expe_pass": tally.expe,
                "eta_pass": tally.eta,
                "sp_checks": tally.sp_checks,
                "sp_pass": tally.sp,
                "all_pass": tally.all_pass(),
            })
            .to_string()
                + "\n"
        }
        Format::Csv => format!(
            "n,m,profiles,expe_pass,eta_pass,sp_checks,sp_pass,all_pass\n{n},{m},{},{},{},{},{},{}\n",
            tally.profiles,
            tally.expe,
            tally.eta,
            tally.sp_checks,
            tally.sp,
            tally.all_pass()
        ),
        Format::Pretty => format!(
            "RSD on {} profiles ({n} agents, {m} houses)\n  ex-post efficiency  {}/{}\n  equal treatment     {}/{}\n  adjacent swaps      {}/{}\n{verdict}\n",
            tally.profiles, tally.expe, tally.profiles, tally.eta, tally.profiles, tally.sp, tally.sp_checks
        ),
    };
    io::stdout().write_all(text.as_bytes()).map_err(stdout_io)?;
    Ok(if tally.all_pass() { 0 } else { EXIT_INFEASIBLE })
}

fn cmd_enumerate(a: &SizeArgs) -> Outcome {
    let universe = Universe::build(a.n, a.m)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    if a.format == Format::Csv {
        writeln!(w, "profile,D,orbit_size").map_err(stdout_io)?;
    }
    for (k, p) in universe.profiles().iter().enumerate() {
        let (d, orbit) = (universe.level(k), universe.orbit_size(k));
        match a.format {
            Format::Json => writeln!(
                w,
                "{}",
                serde_json::json!({"profile": p.to_string(), "D": d, "orbit_size": orbit})
            ),
            Format::Csv => writeln!(w, "{p},{d},{orbit}"),
            Format::Pretty => writeln!(w, "{d:>3} {orbit:>5}  {p}"),
        }
        .map_err(stdout_io)?;
    }
    w.flush().map_err(stdout_io)?;
    Ok(0)
}
