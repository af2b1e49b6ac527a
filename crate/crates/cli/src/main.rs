//! `hotelling`: construct, evaluate and verify Hotelling location games.
//!
//! Exit codes: 0 success or verdict true, 1 verdict false, 2 input error,
//! 3 construction unavailable, 4 search or support capped.

mod atlas;
mod input;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hotelling::equilibrium::{
    construct_mixed, construct_pure, find_partition, verify_multi_unit, verify_two_player,
    VerificationReport, Witness,
};
use hotelling::mixed::{make_olk, mixed_payoff_capped, MixedProfile, DEFAULT_SUPPORT_CAP};
use hotelling::oracle::{
    best_response, certify_no_deviation, grid_best_response, DeviationResult, SearchOptions,
};
use hotelling::{masses, social_cost, Error, Game, Unavailable};
use serde::Serialize;

use input::{parse_game, parse_locations, read_opponents, read_profile, ProfileFile};

const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNAVAILABLE: u8 = 3;
const EXIT_CAPPED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "hotelling",
    version,
    about = "Exact analysis of multi-unit Hotelling games on [0,1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Pure,
    Mixed,
    TwoPlayer,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an equilibrium profile for a game.
    Construct {
        /// Facility counts, e.g. `1,2,2`.
        #[arg(long)]
        game: String,
        #[arg(long, value_enum, default_value = "pure")]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG plot of the profile.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check a profile file and print a verification report.
    Verify {
        #[arg(long)]
        profile: PathBuf,
        /// Expected game; checked against the profile when given.
        #[arg(long)]
        game: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Exact payoffs of a pure or mixed profile.
    Payoff {
        #[arg(long)]
        profile: PathBuf,
        /// Include per-facility masses.
        #[arg(long)]
        detail: bool,
        /// Cap on the product support of a mixed profile.
        #[arg(long, default_value_t = DEFAULT_SUPPORT_CAP)]
        cap: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Social cost of a location set.
    SocialCost {
        /// Comma-separated locations, e.g. `1/6,1/2,5/6`.
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        locations: Option<String>,
        /// Use the locations selected in a pure profile.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best response against fixed opponents.
    BestResponse {
        /// Opponents as a profile file, or inline: players separated by `;`,
        /// locations by `,`.
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        against: Option<String>,
        /// Number of facilities of the responding player.
        #[arg(long, required_unless_present = "profile")]
        m: Option<usize>,
        /// Profile file; the response is for `--player` against the rest.
        #[arg(long, requires = "player")]
        profile: Option<PathBuf>,
        /// Responding player, counted from 1.
        #[arg(long)]
        player: Option<usize>,
        /// Restrict positions to the grid {0, 1/r, ..., 1}.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        grid: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every game up to a total number of facilities.
    Atlas {
        #[arg(long = "max-n")]
        max_n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Directory for one SVG per game with a constructed profile.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug, Clone)]
struct SearchArgs {
    /// Largest number of candidate subsets searched exhaustively.
    #[arg(long, default_value_t = hotelling::oracle::DEFAULT_SEARCH_CAP, value_parser = clap::value_parser!(u128))]
    cap: u128,
    /// Seed for the coordinate-ascent fallback.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn options(&self) -> Result<SearchOptions> {
        if self.cap < 1 {
            bail!("--cap must be at least 1");
        }
        Ok(SearchOptions {
            cap: self.cap,
            seed: self.seed,
            ..SearchOptions::default()
        })
    }
}

fn code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::ConstructionUnavailable(_)) => EXIT_UNAVAILABLE,
        Some(Error::SupportTooLarge { .. }) | Some(Error::SearchTooLarge { .. }) => EXIT_CAPPED,
        _ => EXIT_INPUT,
    }
}

fn emit(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => {
            fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
        }
        None => print_stdout(&(text + "\n")),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn print_stdout(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
    {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_svg(path: &Path, title: &str, profile: &MixedProfile) -> Result<()> {
    fs::write(path, svg::render(title, profile))
        .with_context(|| format!("cannot write {}", path.display()))
}

fn cmd_construct(
    game: &str,
    kind: Kind,
    out: Option<&Path>,
    svg_path: Option<&Path>,
) -> Result<u8> {
    let game = parse_game(game)?;
    let profile = match kind {
        Kind::Pure => {
            let p = construct_pure(&game)?;
            emit(out, &p)?;
            MixedProfile::from_pure(&p)
        }
        Kind::Mixed => {
            let plan = match find_partition(&game) {
                Ok(Some(plan)) => plan,
                Ok(None) => {
                    return Err(Error::ConstructionUnavailable(Unavailable::NoPartition).into())
                }
                Err(Error::WrongGameKind(msg)) => {
                    eprintln!("{msg}; use --kind pure");
                    return Err(Error::ConstructionUnavailable(Unavailable::NoPartition).into());
                }
                Err(e) => return Err(e.into()),
            };
            let m = construct_mixed(&game, &plan)?;
            emit(out, &m)?;
            m
        }
        Kind::TwoPlayer => {
            if game.players() != 2 || game.count(0) > game.count(1) {
                bail!("two-player construction needs a game l,k with l <= k, got {game}");
            }
            let (l, k) = (game.count(0), game.count(1));
            let m = MixedProfile::new(vec![make_olk(l, k)?, make_olk(k, k)?])?;
            emit(out, &m)?;
            m
        }
    };
    if let Some(path) = svg_path {
        write_svg(path, &game.to_string(), &profile)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleReport {
    verdict: bool,
    method: &'static str,
    players: Vec<DeviationResult>,
}

fn summarize(report: &VerificationReport) {
    eprintln!(
        "verdict: {}",
        if report.verdict {
            "equilibrium"
        } else {
            "not an equilibrium"
        }
    );
    for c in &report.conditions {
        eprintln!(
            "  [{}] {}",
            if c.passed { "pass" } else { "FAIL" },
            c.id.describe()
        );
        if let Some(w) = &c.witness {
            eprintln!("         {}", describe_witness(w));
        }
    }
    if let Some(d) = &report.deviation {
        let witness: Vec<String> = d.result.witness.iter().map(ToString::to_string).collect();
        eprintln!(
            "  player {} gains {} by moving to ({})",
            d.player + 1,
            d.result.gain,
            witness.join(", ")
        );
    }
    if let Some(note) = &report.note {
        eprintln!("  {note}");
    }
}

fn describe_witness(w: &Witness) -> String {
    match w {
        Witness::LonePeripheral {
            end,
            position,
            player,
            ..
        } => {
            format!(
                "{end:?} extreme {position} holds only player {}",
                player + 1
            )
        }
        Witness::LowPayoff {
            player,
            payoff,
            side_mass,
            at,
            ..
        } => {
            format!(
                "player {} earns {payoff} < side catchment {side_mass} at {at}",
                player + 1
            )
        }
        Witness::OwnNeighbor {
            player,
            position,
            neighbor,
        } => {
            format!("lone facility of player {} at {position} neighbors another of the same player at {neighbor}", player + 1)
        }
        Witness::UnequalMasses {
            player,
            low_position,
            low_mass,
            high_position,
            high_mass,
        } => format!(
            "player {}: {low_mass} at {low_position} vs {high_mass} at {high_position}",
            player + 1
        ),
        Witness::NotSocialOptimum { failure } => format!("{failure:?}"),
        Witness::NotOptimalLocations { expected, .. } => {
            let xs: Vec<String> = expected.iter().map(ToString::to_string).collect();
            format!("expected the point mass on ({})", xs.join(", "))
        }
    }
}

fn cmd_verify(
    profile: &Path,
    game: Option<&str>,
    out: Option<&Path>,
    search: &SearchArgs,
) -> Result<u8> {
    let file = read_profile(profile)?.normalized();
    let game_of_file = file.game();
    if let Some(spec) = game {
        let expected = parse_game(spec)?;
        if expected != game_of_file {
            bail!("profile plays {game_of_file}, not {expected}");
        }
    }
    match file {
        ProfileFile::Pure(p) => {
            let report = verify_multi_unit(&game_of_file, &p)?;
            emit(out, &report)?;
            summarize(&report);
            Ok(if report.verdict { 0 } else { EXIT_FALSE })
        }
        ProfileFile::Mixed(m)
            if m.players() == 2 && game_of_file.count(0) <= game_of_file.count(1) =>
        {
            let report = verify_two_player(&game_of_file, m.strategy(0), m.strategy(1))?;
            emit(out, &report)?;
            summarize(&report);
            Ok(if report.verdict { 0 } else { EXIT_FALSE })
        }
        ProfileFile::Mixed(m) => {
            let players = certify_no_deviation(&game_of_file, &m, &search.options()?)?;
            let verdict = players.iter().all(|d| !d.is_beneficial());
            let exhaustive = players.iter().all(|d| d.exhaustive);
            emit(
                out,
                &OracleReport {
                    verdict,
                    method: "best_response",
                    players: players.clone(),
                },
            )?;
            for (i, d) in players.iter().enumerate() {
                eprintln!(
                    "  player {}: payoff {}, best response {}{}, gain {}",
                    i + 1,
                    d.current,
                    d.supremum,
                    if d.attained { "" } else { " (limit)" },
                    d.gain
                );
            }
            if verdict && !exhaustive {
                eprintln!("no beneficial deviation found, but the search was capped");
                return Ok(EXIT_CAPPED);
            }
            eprintln!(
                "verdict: {}",
                if verdict {
                    "equilibrium"
                } else {
                    "not an equilibrium"
                }
            );
            Ok(if verdict { 0 } else { EXIT_FALSE })
        }
    }
}

#[derive(Serialize)]
struct FacilityRow {
    player: usize,
    position: hotelling::Rational,
    mass: hotelling::Rational,
    c_l: hotelling::Rational,
    c_r: hotelling::Rational,
}

#[derive(Serialize)]
struct PayoffDetail {
    payoffs: Vec<hotelling::Rational>,
    facilities: Vec<FacilityRow>,
}

fn cmd_payoff(profile: &Path, detail: bool, cap: u128, out: Option<&Path>) -> Result<u8> {
    match read_profile(profile)?.normalized() {
        ProfileFile::Pure(p) => {
            let report = masses(&p);
            if detail {
                let facilities = report
                    .facilities
                    .iter()
                    .map(|f| FacilityRow {
                        player: f.player,
                        position: f.location.position.clone(),
                        mass: f.mass.clone(),
                        c_l: f.c_l.clone(),
                        c_r: f.c_r.clone(),
                    })
                    .collect();
                emit(
                    out,
                    &PayoffDetail {
                        payoffs: report.payoffs,
                        facilities,
                    },
                )?;
            } else {
                emit(out, &report.payoffs)?;
            }
        }
        ProfileFile::Mixed(m) => {
            if detail {
                bail!("--detail applies to pure profiles only");
            }
            emit(out, &mixed_payoff_capped(&m.game(), &m, cap)?)?;
        }
    }
    Ok(0)
}

fn cmd_social_cost(
    locations: Option<&str>,
    profile: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    let xs = match (locations, profile) {
        (Some(text), _) => parse_locations(text)?,
        (None, Some(path)) => match read_profile(path)?.normalized() {
            ProfileFile::Pure(p) => p.location_set().into_iter().collect(),
            ProfileFile::Mixed(_) => bail!("social cost needs a pure profile"),
        },
        (None, None) => bail!("give --locations or --profile"),
    };
    emit(out, &social_cost(&xs)?)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_best_response(
    against: Option<&str>,
    m: Option<usize>,
    profile: Option<&Path>,
    player: Option<usize>,
    grid: Option<u64>,
    search: &SearchArgs,
    out: Option<&Path>,
) -> Result<u8> {
    let opts = search.options()?;
    let (opponents, m, current) = match (against, profile) {
        (Some(spec), _) => {
            let m = m.context("--m is required with --against")?;
            (read_opponents(spec)?, m, None)
        }
        (None, Some(path)) => {
            let mixed = read_profile(path)?.to_mixed();
            let game = mixed.game();
            let player = player.context("--player is required with --profile")?;
            if player == 0 || player > game.players() {
                bail!("--player must be between 1 and {}", game.players());
            }
            let i = player - 1;
            if let Some(m) = m {
                if m != game.count(i) {
                    bail!("player {player} has {} facilities, not {m}", game.count(i));
                }
            }
            let current = mixed_payoff_capped(&game, &mixed, opts.support_cap)?.remove(i);
            let others = mixed
                .mixed
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s.clone())
                .collect();
            (others, game.count(i), Some(current))
        }
        (None, None) => bail!("give --against or --profile"),
    };
    let br = match grid {
        Some(r) => grid_best_response(&opponents, m, r as usize, opts.cap)?,
        None => best_response(&opponents, m, &opts)?,
    };
    let exhaustive = br.exhaustive;
    match current {
        Some(current) => {
            let dev = br.against(current);
            eprintln!("best response {} (gain {})", dev.supremum, dev.gain);
            emit(out, &dev)?;
        }
        None => {
            eprintln!(
                "best response {}{}",
                br.supremum,
                if br.attained { "" } else { " (not attained)" }
            );
            emit(out, &br)?;
        }
    }
    if !exhaustive {
        eprintln!("search exceeded the cap; the value is a lower bound");
        return Ok(EXIT_CAPPED);
    }
    Ok(0)
}

fn cmd_atlas(
    max_n: usize,
    format: Format,
    svg_dir: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8> {
    if max_n > atlas::MAX_TOTAL {
        bail!("--max-n is limited to {}", atlas::MAX_TOTAL);
    }
    let rows = atlas::rows(max_n);
    match format {
        Format::Json => emit(out, &rows)?,
        Format::Csv => {
            let text = atlas::to_csv(&rows);
            match out {
                Some(path) => fs::write(path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print_stdout(&text)?,
            }
        }
    }
    if let Some(dir) = svg_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for r in &rows {
            let game = Game::new(r.counts.clone())?;
            let profile = match (&r.profile, find_partition(&game)) {
                (Some(p), _) => MixedProfile::from_pure(p),
                (None, Ok(Some(plan))) => construct_mixed(&game, &plan)?,
                _ => continue,
            };
            let name: Vec<String> = r.counts.iter().map(ToString::to_string).collect();
            write_svg(
                &dir.join(format!("game_{}.svg", name.join("-"))),
                &game.to_string(),
                &profile,
            )?;
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Construct {
            game,
            kind,
            out,
            svg,
        } => cmd_construct(&game, kind, out.as_deref(), svg.as_deref()),
        Command::Verify {
            profile,
            game,
            out,
            search,
        } => cmd_verify(&profile, game.as_deref(), out.as_deref(), &search),
        Command::Payoff {
            profile,
            detail,
            cap,
            out,
        } => cmd_payoff(&profile, detail, cap, out.as_deref()),
        Command::SocialCost {
            locations,
            profile,
            out,
        } => cmd_social_cost(locations.as_deref(), profile.as_deref(), out.as_deref()),
        Command::BestResponse {
            against,
            m,
            profile,
            player,
            grid,
            search,
            out,
        } => cmd_best_response(
            against.as_deref(),
            m,
            profile.as_deref(),
            player,
            grid,
            &search,
            out.as_deref(),
        ),
        Command::Atlas {
            max_n,
            format,
            svg,
            out,
        } => cmd_atlas(max_n, format, svg.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code_for(&err))
        }
    }
}
