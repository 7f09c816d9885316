#!/usr/bin/env python3
"""
Blotto Defense Main Interface
Command-line interface for equilibrium tables, simulations, hotbooting and sweeps
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from blotto_defense import config
from blotto_defense.agents import test_dqn, test_network, test_tabular
from blotto_defense.database import ResultsStore
from blotto_defense.environment import test_environment
from blotto_defense.game import test_core, test_equilibrium
from blotto_defense.harness import (
    NE_PRESETS,
    analyze_point,
    get_preset,
    hotboot,
    load_scenario,
    marginal_table,
    ne_sweep,
    run_scenario,
    run_sweep,
    save_artifact,
    summary_row,
    write_report,
)
from blotto_defense.harness import acceptance, test_harness
from blotto_defense.harness.runner import HOTBOOT_KINDS, seed_streams
from summarizers import create_smry_scenario_table
from summarizers import run_all_tests as run_summary_tests

# Configure logging
logging.basicConfig(
    level=config.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(config.LOG_FILE),
        logging.StreamHandler()
    ]
)

logger = logging.getLogger(__name__)


def _int_list(text):
    return [int(v) for v in text.split(',') if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(',') if v.strip()]


def _scenario(args):
    """Scenario from --preset or a scenario file, with command-line overrides"""
    if args.preset:
        scenario = get_preset(args.preset)
    elif args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        raise ValueError("a scenario file or --preset is required")

    overrides = {}
    if getattr(args, 'defender', None):
        overrides['defender'] = args.defender
    if getattr(args, 'horizon', None) is not None:
        overrides['horizon'] = args.horizon
    if getattr(args, 'seed', None):
        overrides['seeds'] = tuple(args.seed)
    if getattr(args, 'warm_start', None):
        overrides['warm_start'] = args.warm_start
    return replace(scenario, **overrides) if overrides else scenario


def ne_analyze(args):
    """Print closed-form equilibrium tables as CSV"""
    try:
        if args.preset:
            if args.preset not in NE_PRESETS:
                raise ValueError(f"unknown equilibrium preset {args.preset!r}; expected {', '.join(NE_PRESETS)}")
            sm_values, d_values, sn = NE_PRESETS[args.preset]
            table = ne_sweep('asym', sm_values, sn, d_values, args.levels)
            print(table.to_csv(index=False, float_format='%.17g'), end='')
            return

        data = _float_list(args.b) if args.b else None
        sm_values = args.sm or []
        d_values = args.d or ([len(data)] if data else [])
        if args.sn is None or not sm_values or not d_values:
            raise ValueError("--sm, --sn and either --d or --b are required without --preset")

        if len(sm_values) == 1 and len(d_values) == 1:
            analysis, game, B = analyze_point(args.regime, sm_values[0], args.sn, d_values[0], data, args.levels)
            row = summary_row(analysis, game, B)
            print(','.join(row))
            print(','.join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row.values()))
            print()
            print(marginal_table(analysis).to_csv(index=False, float_format='%.17g'), end='')
        else:
            table = ne_sweep(args.regime, sm_values, args.sn, d_values, args.levels)
            print(table.to_csv(index=False, float_format='%.17g'), end='')

    except Exception as e:
        logger.error(f"Failed to compute equilibrium: {e}")
        sys.exit(1)


def simulate(args):
    """Run every seed of a scenario and write the metrics files"""
    try:
        scenario = _scenario(args)
        report = run_scenario(scenario, max_workers=args.workers)

        written = write_report(report, args.out_dir, args.plot_format)
        if args.database:
            with ResultsStore(args.database) as store:
                store.store_report(report)

        summary = report.summary().set_index('seed').loc['mean']
        print(f"\n=== {scenario.name} ({scenario.defender}) ===")
        print(f"Seeds: {len(report.seeds)}, slots: {scenario.horizon}")
        print(f"Mean R: {summary['mean_R']:.4f}  (last {scenario.window} slots: {summary['tail_mean_R']:.4f})")
        print(f"Mean uD: {summary['mean_uD']:.4f}  (last {scenario.window} slots: {summary['tail_mean_uD']:.4f})")
        print(f"Decision time: {report.timing()['mean_decision_ms'].iloc[-1]:.3f} ms per slot")
        print(f"Files written: {len(written)} in {args.out_dir}")

        logger.info("Simulation completed successfully")

    except Exception as e:
        logger.error(f"Failed to simulate: {e}")
        sys.exit(1)


def hotboot_artifact(args):
    """Hotboot a PHC or DQN defender and save the warm start"""
    try:
        scenario = _scenario(args)
        if scenario.defender not in HOTBOOT_KINDS:
            raise ValueError(f"defender {scenario.defender!r} does not hotboot; use one of {', '.join(HOTBOOT_KINDS)}")
        seed = args.seed[0] if args.seed else scenario.seeds[0]
        _, _, hotboot_ss = seed_streams(seed)
        warm = hotboot(scenario, hotboot_ss)
        path = save_artifact(args.out, scenario.game, scenario.dqn, warm)
        print(f"Warm start for {scenario.name} ({scenario.defender}, seed {seed}) saved to {path}")

        logger.info("Hotbooting completed successfully")

    except Exception as e:
        logger.error(f"Failed to hotboot: {e}")
        sys.exit(1)


def sweep(args):
    """Run a scenario across values of one parameter and write the combined summary"""
    try:
        scenario = _scenario(args)
        summary, reports = run_sweep(scenario, args.axis, args.values, args.defenders, args.workers)

        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{scenario.name}.sweep.csv"
        summary.to_csv(path, index=False, float_format='%.17g')
        if args.database:
            with ResultsStore(args.database) as store:
                for report in reports:
                    store.store_report(report)

        print(f"\n=== Sweep {scenario.name} over {args.axis or scenario.sweep_axis} ===")
        print(summary[['value', 'defender', 'mean_R', 'tail_mean_R']].to_string(index=False))
        print(f"\nSummary saved to {path}")

        logger.info("Sweep completed successfully")

    except Exception as e:
        logger.error(f"Failed to sweep: {e}")
        sys.exit(1)


def query_data(args):
    """Execute a SQL query against the results store"""
    try:
        with ResultsStore(args.database) as store:
            if args.file:
                with open(args.file, 'r') as f:
                    sql = f.read()
            else:
                sql = args.sql

            result = store.query(sql)

            if args.output:
                if args.output.endswith('.csv'):
                    result.to_csv(args.output, index=False)
                elif args.output.endswith('.parquet'):
                    result.to_parquet(args.output, index=False)
                else:
                    result.to_json(args.output, orient='records')
                print(f"Results saved to {args.output}")
            else:
                print(result.to_string())

    except Exception as e:
        logger.error(f"Failed to execute query: {e}")
        sys.exit(1)


def summarize(args):
    """Build the smry_scenario table"""
    try:
        create_smry_scenario_table(args.database, args.window)
        with ResultsStore(args.database) as store:
            result = store.query("SELECT * FROM smry_scenario")
        print("\n=== smry_scenario ===")
        print(result.to_string(index=False))

    except Exception as e:
        logger.error(f"Failed to build summary tables: {e}")
        sys.exit(1)


def self_test(args):
    """Run the check suites, optionally including the long reproduction checks"""
    suites = {
        'game_core': test_core.run_all_tests,
        'equilibrium': test_equilibrium.run_all_tests,
        'environment': test_environment.run_all_tests,
        'tabular': test_tabular.run_all_tests,
        'network': test_network.run_all_tests,
        'dqn': test_dqn.run_all_tests,
        'harness': test_harness.run_all_tests,
        'smry_scenario': run_summary_tests,
    }
    if args.slow:
        suites['acceptance'] = acceptance.run_slow_checks

    results = {}
    for suite, run in suites.items():
        for name, passed in run().items():
            results[f"{suite}.{name}"] = passed

    passed = sum(results.values())
    print(f"\nTest Summary: {passed}/{len(results)} checks passed")
    for name, ok in results.items():
        if not ok:
            print(f"  ❌ {name}")
    if passed != len(results):
        logger.error(f"Some checks failed: {passed}/{len(results)} passed")
        sys.exit(1)
    logger.info("All checks passed")


def _add_scenario_args(parser, seeds=True):
    parser.add_argument('scenario', nargs='?', help='Scenario file (key=value lines)')
    parser.add_argument('--preset', '-p', help='Named preset instead of a scenario file')
    parser.add_argument('--defender', help='Override the defender kind')
    parser.add_argument('--horizon', type=int, help='Override the number of slots')
    if seeds:
        parser.add_argument('--seed', type=int, nargs='+', help='Override the seed list')


def main():
    """Main CLI interface"""
    parser = argparse.ArgumentParser(
        description='Blotto CPU allocation defense simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s ne-analyze --regime asym --sm 600 --sn 150 --d 20
  %(prog)s ne-analyze --regime sym --sm 6 --sn 6 --b 1,1,1
  %(prog)s ne-analyze --preset fig2
  %(prog)s simulate --preset fig4-reduced --defender hotboot-dqn --out-dir results
  %(prog)s hotboot --preset fig5-reduced --defender hotboot-phc --out warm/fig5.tables
  %(prog)s simulate --preset fig5-reduced --defender hotboot-phc --warm-start warm/fig5.tables
  %(prog)s sweep --preset fig6 --defenders ne-marginal q
  %(prog)s query --sql "SELECT * FROM run_log" --database results.duckdb
  %(prog)s self-test --slow
        """
    )

    parser.add_argument(
        '--database', '-d',
        default=None,
        help=f'Path to DuckDB results store (query/summarize default: {config.DB_PATH})'
    )

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Equilibrium tables
    ne_parser = subparsers.add_parser('ne-analyze', help='Closed-form equilibrium tables as CSV')
    ne_parser.add_argument('--regime', choices=['sym', 'asym'], default='asym', help='Equilibrium regime')
    ne_parser.add_argument('--sm', type=_int_list, help='Defense CPUs (comma list for a sweep)')
    ne_parser.add_argument('--sn', type=int, help='Attack CPUs')
    ne_parser.add_argument('--d', type=_int_list, help='Storage devices (comma list for a sweep)')
    ne_parser.add_argument('--b', help='Data sizes in [0, 1], comma separated')
    ne_parser.add_argument('--levels', type=int, default=10, help='Quantization levels (default: 10)')
    ne_parser.add_argument('--preset', choices=sorted(NE_PRESETS), help='Equilibrium sweep preset')
    ne_parser.set_defaults(func=ne_analyze)

    # Simulate command
    simulate_parser = subparsers.add_parser('simulate', help='Run a scenario over its seeds')
    _add_scenario_args(simulate_parser)
    simulate_parser.add_argument('--out-dir', '-o', default=str(config.OUT_DIR), help='Output directory')
    simulate_parser.add_argument('--warm-start', help='Hotbooted artifact to warm-start from')
    simulate_parser.add_argument('--plot-format', choices=['csv', 'parquet'], default='csv')
    simulate_parser.add_argument('--workers', '-w', type=int, default=config.MAX_WORKERS,
                                 help=f'Concurrent seeds (default: {config.MAX_WORKERS})')
    simulate_parser.set_defaults(func=simulate)

    # Hotboot command
    hotboot_parser = subparsers.add_parser('hotboot', help='Hotboot a defender and save the warm start')
    _add_scenario_args(hotboot_parser)
    hotboot_parser.add_argument('--out', required=True, help='Artifact path')
    hotboot_parser.set_defaults(func=hotboot_artifact)

    # Sweep command
    sweep_parser = subparsers.add_parser('sweep', help='Sweep defense budget or device count')
    _add_scenario_args(sweep_parser)
    sweep_parser.add_argument('--axis', choices=['defense_budget', 'devices'], help='Parameter to sweep')
    sweep_parser.add_argument('--values', type=int, nargs='+', help='Parameter values')
    sweep_parser.add_argument('--defenders', nargs='+', help='Defender kinds to compare')
    sweep_parser.add_argument('--out-dir', '-o', default=str(config.OUT_DIR), help='Output directory')
    sweep_parser.add_argument('--workers', '-w', type=int, default=config.MAX_WORKERS)
    sweep_parser.set_defaults(func=sweep)

    # Query command
    query_parser = subparsers.add_parser('query', help='Execute SQL query against the results store')
    query_group = query_parser.add_mutually_exclusive_group(required=True)
    query_group.add_argument('--sql', '-s', help='SQL query to execute')
    query_group.add_argument('--file', '-f', help='File containing SQL query')
    query_parser.add_argument('--output', '-o', help='Output file (CSV, JSON, or Parquet)')
    query_parser.set_defaults(func=query_data)

    # Summarize command
    summarize_parser = subparsers.add_parser('summarize', help='Build the smry_scenario table')
    summarize_parser.add_argument('--window', type=int, default=config.MOVING_AVERAGE_WINDOW,
                                  help='Tail window in slots')
    summarize_parser.set_defaults(func=summarize)

    # Self-test command
    self_test_parser = subparsers.add_parser('self-test', help='Run the check suites')
    self_test_parser.add_argument('--slow', action='store_true', help='Include the long reproduction checks')
    self_test_parser.set_defaults(func=self_test)

    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        sys.exit(1)

    if args.command in ('query', 'summarize') and args.database is None:
        args.database = config.DB_PATH

    args.func(args)


if __name__ == '__main__':
    main()
