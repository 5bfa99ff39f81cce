use std::path::Path;

use iivcg_core::audit::{audit, AuditConfig, AuditGrid};
use iivcg_core::first_price::{
    fp_equilibrium_check, fp_rule, poa_report, pos_bid_grid, pos_utility_bound_check,
    DeviationGrid, EquilibriumCheck, FirstPriceError,
};
use iivcg_core::fixtures::{
    poa_equilibrium, poa_example, poa_truthful, pos_example, pos_truthful, tradeoff_example,
    weighted_example, weighted_graph, weighted_truthful,
};
use iivcg_core::instantiations::{AuctionInspired, Weighted};
use iivcg_core::io::{load_bids, load_graph, load_setting, save_bids, save_graph, save_setting, setting_to_json};
use iivcg_core::{Alg1Contract, BidProfile, Engine, PaymentRule, Rational, RuleError, Setting};
use serde_json::json;

use crate::output::{self, exact};
use crate::{
    AuditContract, Cli, CliError, Command, DeviationArgs, ExampleCommand, ExampleOut,
    FirstPriceCommand, GridArgs, PayContract, EXIT_FAILED, EXIT_IMPOSSIBLE, EXIT_OK,
};

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let json = cli.json;
    match cli.command {
        Command::Check {
            setting,
            strict_eps,
        } => check(&setting, strict_eps.as_ref(), json),
        Command::Pay {
            setting,
            bids,
            outcome,
            contract,
            graph,
            strict_eps,
        } => pay(
            &setting,
            &bids,
            &outcome,
            contract,
            graph.as_deref(),
            strict_eps.as_ref(),
            json,
        ),
        Command::Audit {
            setting,
            contract,
            graph,
            grid,
        } => audit_cmd(&setting, contract, graph.as_deref(), &grid, json),
        Command::Example { example } => example_cmd(example, json),
        Command::Firstprice { command } => first_price(command, json),
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn engine(setting: Setting) -> Result<Engine, CliError> {
    Engine::new(setting).map_err(input)
}

fn check(path: &Path, strict_eps: Option<&Rational>, json: bool) -> Result<u8, CliError> {
    let setting = load_setting(path)?;
    let verdict = engine(setting.clone())?.alg2_exists(strict_eps).map_err(input)?;
    if json {
        output::print_json(&verdict);
    } else {
        print!("{}", output::verdict_text(&setting, &verdict));
    }
    Ok(if verdict.is_possible() {
        EXIT_OK
    } else {
        EXIT_IMPOSSIBLE
    })
}

/// Builds the requested contract, insisting that a graph comes with (and
/// only with) the weighted contract.
fn build_rule(
    setting: &Setting,
    weighted: bool,
    alg1: bool,
    graph: Option<&Path>,
) -> Result<Box<dyn PaymentRule>, CliError> {
    match (weighted, graph) {
        (true, None) => {
            return Err(CliError::Usage(
                "the weighted contract needs --graph".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(CliError::Usage(
                "--graph only applies to the weighted contract".into(),
            ))
        }
        (true, Some(path)) => {
            let g = load_graph(path)?;
            return Ok(Box::new(Weighted::new(setting.clone(), g).map_err(input)?));
        }
        (false, None) => {}
    }
    if alg1 {
        Ok(Box::new(Alg1Contract::new(engine(setting.clone())?)))
    } else {
        Ok(Box::new(AuctionInspired::new(setting.clone())))
    }
}

fn pay(
    setting_path: &Path,
    bids_path: &Path,
    outcome: &str,
    contract: PayContract,
    graph: Option<&Path>,
    strict_eps: Option<&Rational>,
    json: bool,
) -> Result<u8, CliError> {
    let setting = load_setting(setting_path)?;
    let bids = load_bids(bids_path, &setting)?;
    let o = setting
        .outcome_index(outcome)
        .ok_or_else(|| CliError::Input(format!("unknown outcome {outcome:?}")))?;
    let rule = build_rule(
        &setting,
        contract == PayContract::Weighted,
        contract == PayContract::Alg1,
        graph,
    )?;
    let existence = match strict_eps {
        Some(eps) => Some(engine(setting.clone())?.alg2_exists(Some(eps)).map_err(input)?),
        None => None,
    };
    match rule.payment_table(&bids) {
        Ok(table) => {
            let action = setting.best_response_to_table(&bids, &table);
            let payments = table.for_outcome(o);
            if json {
                output::print_json(&json!({
                    "result": "payments",
                    "contract": rule.name(),
                    "outcome": outcome,
                    "action": setting.actions()[action].name,
                    "payments": output::named_values(&setting, &payments),
                    "existence": existence,
                }));
            } else {
                println!(
                    "contract {} at outcome {outcome}; the agent takes {}",
                    rule.name(),
                    setting.actions()[action].name
                );
                for (p, t) in setting.principals().iter().zip(&payments) {
                    println!("  {}: {}", p.name, output::with_decimal(t));
                }
                if let Some(v) = &existence {
                    println!("existence check: {}", output::verdict_word(v));
                }
            }
            Ok(EXIT_OK)
        }
        Err(RuleError::Impossible { action, k, sum_m }) => {
            if json {
                output::print_json(&json!({
                    "result": "impossible",
                    "contract": rule.name(),
                    "action": setting.actions()[action].name,
                    "k": exact(&k),
                    "sum_m": exact(&sum_m),
                    "existence": existence,
                }));
            } else {
                println!(
                    "Impossible: {} is efficient at these bids and needs expected payment {} (≈ {}), but individual rationality caps the total at {} (≈ {})",
                    setting.actions()[action].name,
                    exact(&k),
                    output::decimal(&k),
                    exact(&sum_m),
                    output::decimal(&sum_m),
                );
            }
            Ok(EXIT_IMPOSSIBLE)
        }
        Err(e) => Err(input(e)),
    }
}

fn audit_cmd(
    path: &Path,
    contract: AuditContract,
    graph: Option<&Path>,
    grid_args: &GridArgs,
    json: bool,
) -> Result<u8, CliError> {
    let setting = load_setting(path)?;
    let rule: Box<dyn PaymentRule> = match contract {
        AuditContract::Fp => {
            if graph.is_some() {
                return Err(CliError::Usage(
                    "--graph only applies to the weighted contract".into(),
                ));
            }
            Box::new(fp_rule())
        }
        other => build_rule(
            &setting,
            other == AuditContract::Weighted,
            other == AuditContract::Alg1,
            graph,
        )?,
    };
    if grid_args.resolution == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let config = AuditConfig {
        resolution: grid_args.resolution,
        random_points: grid_args.random_points,
        seed: grid_args.seed,
        bound: grid_args.bound.clone(),
        max_profiles: grid_args.max_profiles,
    };
    let grid = AuditGrid::build(&setting, config);
    let report = audit(&setting, rule.as_ref(), &grid);
    if json {
        output::print_json(&report);
    } else {
        print!("{}", output::audit_text(&setting, &report));
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_FAILED })
}

fn write_example(
    setting: &Setting,
    out: &ExampleOut,
    truthful: &BidProfile,
    json: bool,
) -> Result<(), CliError> {
    match &out.out {
        Some(path) => {
            save_setting(path, setting)?;
            if !json {
                eprintln!("wrote {}", path.display());
            }
        }
        None => println!("{}", setting_to_json(setting)),
    }
    if let Some(path) = &out.bids_out {
        save_bids(path, truthful)?;
        if !json {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn example_cmd(example: ExampleCommand, json: bool) -> Result<u8, CliError> {
    let usage = |e: iivcg_core::fixtures::FixtureError| CliError::Usage(e.to_string());
    match example {
        ExampleCommand::Poa {
            n,
            gamma,
            eps,
            equilibrium_out,
            out,
        } => {
            let s = poa_example(n, &gamma, &eps).map_err(usage)?;
            write_example(&s, &out, &poa_truthful(n, &gamma, &eps), json)?;
            if let Some(path) = equilibrium_out {
                save_bids(&path, &poa_equilibrium(n, &gamma, &eps))?;
            }
        }
        ExampleCommand::Pos { q, gamma, eps, out } => {
            let s = pos_example(q, &gamma, &eps).map_err(usage)?;
            write_example(&s, &out, &pos_truthful(q, &gamma), json)?;
        }
        ExampleCommand::Weighted { graph_out, out } => {
            write_example(&weighted_example(), &out, &weighted_truthful(), json)?;
            if let Some(path) = graph_out {
                save_graph(&path, &weighted_graph())?;
            }
        }
        ExampleCommand::Tradeoff { eps, out } => {
            let s = tradeoff_example(&eps).map_err(usage)?;
            let zero = BidProfile::zeros(s.num_principals(), s.num_outcomes());
            write_example(&s, &out, &zero, json)?;
        }
    }
    Ok(EXIT_OK)
}

fn deviation_grid(setting: &Setting, args: &DeviationArgs) -> Result<DeviationGrid, CliError> {
    if args.resolution == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    Ok(DeviationGrid::new(setting, args.resolution, args.bound.clone()))
}

fn first_price(command: FirstPriceCommand, json: bool) -> Result<u8, CliError> {
    match command {
        FirstPriceCommand::Check {
            setting,
            values,
            bids,
            grid,
        } => {
            let s = load_setting(&setting)?;
            let values = load_bids(&values, &s)?;
            let bids = load_bids(&bids, &s)?;
            let grid = deviation_grid(&s, &grid)?;
            let result = fp_equilibrium_check(&s, &values, &bids, &grid);
            if json {
                output::print_json(&result);
            } else {
                match &result {
                    EquilibriumCheck::Equilibrium => {
                        println!("no profitable deviation on the grid")
                    }
                    EquilibriumCheck::Deviation {
                        principal,
                        bid,
                        gain,
                    } => println!(
                        "{} gains {} by bidding {bid}",
                        s.principals()[*principal].name,
                        output::with_decimal(gain)
                    ),
                }
            }
            Ok(match result {
                EquilibriumCheck::Equilibrium => EXIT_OK,
                EquilibriumCheck::Deviation { .. } => EXIT_FAILED,
            })
        }
        FirstPriceCommand::Poa {
            setting,
            values,
            bids,
            grid,
        } => {
            let s = load_setting(&setting)?;
            let values = load_bids(&values, &s)?;
            let bids = load_bids(&bids, &s)?;
            let grid = deviation_grid(&s, &grid)?;
            match poa_report(&s, &values, &bids, &grid) {
                Ok(report) => {
                    if json {
                        output::print_json(&report);
                    } else {
                        print!("{}", output::poa_text(&s, &report));
                    }
                    Ok(EXIT_OK)
                }
                Err(e @ FirstPriceError::NotEquilibrium { .. }) => {
                    if json {
                        output::print_json(&json!({ "result": "not_equilibrium", "detail": e.to_string() }));
                    } else {
                        println!("{e}");
                    }
                    Ok(EXIT_FAILED)
                }
            }
        }
        FirstPriceCommand::Pos {
            setting,
            values,
            points,
            min_action,
            bound,
        } => {
            let s = load_setting(&setting)?;
            if s.num_principals() != 1 {
                return Err(CliError::Input(format!(
                    "the utility bound scan needs a single principal, the setting has {}",
                    s.num_principals()
                )));
            }
            let values = load_bids(&values, &s)?;
            let min = match min_action {
                Some(name) => s
                    .action_index(&name)
                    .ok_or_else(|| CliError::Input(format!("unknown action {name:?}")))?,
                None => 1.min(s.num_actions() - 1),
            };
            let bids = pos_bid_grid(&s, points, bound);
            let report = pos_utility_bound_check(&s, values.bid(0), &bids, min);
            if json {
                output::print_json(&report);
            } else {
                match (&report.max_utility, &report.argmax) {
                    (Some(u), Some(b)) => println!(
                        "{} of {} grid bids induce {} or later; best utility {} at {b}",
                        report.considered,
                        bids.len(),
                        s.actions()[min].name,
                        output::with_decimal(u)
                    ),
                    _ => println!(
                        "none of {} grid bids induce {} or later",
                        bids.len(),
                        s.actions()[min].name
                    ),
                }
            }
            Ok(EXIT_OK)
        }
    }
}
