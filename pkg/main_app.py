###############################################################################
# MAIN APPLICATION ENTRY POINT
# optomech-qpt command line: parse a run config, dispatch the task, emit tables
###############################################################################

import os
import sys
import logging
import argparse
from typing import List, Optional

from modules.sweep_cli.result_table import dump_json
from modules.sweep_cli.sweep_cli import parse_config, run
from sweep_manager import sweep_manager
from validation import QptConfig, QptError, error_summary

logger = logging.getLogger(__name__)

EXIT_COMPLETE = 0
EXIT_FAILED = 1
EXIT_FLAGGED = 3
EXIT_INTERRUPTED = 130


###############################################################################
# LOGGING SETUP
# Console logging always; a file handler when OPTOMECH_QPT_LOG_FILE is set
###############################################################################

def setup_logging(verbose: bool = False) -> None:
    level_name = os.environ.get('OPTOMECH_QPT_LOG_LEVEL', 'INFO').upper()
    level = logging.DEBUG if verbose else getattr(logging, level_name, logging.INFO)

    handlers: List[logging.Handler] = [logging.StreamHandler()]
    log_file = os.environ.get('OPTOMECH_QPT_LOG_FILE')
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=level,
        format='%(asctime)s %(levelname)s: %(message)s',
        handlers=handlers
    )
    logging.getLogger().setLevel(level)


###############################################################################
# ARGUMENT PARSING
###############################################################################

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='optomech-qpt',
        description='Parameter sweeps for optomechanical and hybrid light-atom phase transitions',
    )
    parser.add_argument('task', choices=QptConfig.ALLOWED_TASKS)
    parser.add_argument('--config', required=True, help="JSON run config, or '-' for stdin")
    parser.add_argument('--out', help='output path; stdout when omitted')
    parser.add_argument('--format', choices=QptConfig.ALLOWED_FORMATS)
    parser.add_argument('--workers', type=int, help='worker threads for sweep points')
    parser.add_argument('--frame', choices=QptConfig.ALLOWED_FRAMES)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    return parser


###############################################################################
# ENTRY POINT
###############################################################################

def main(argv: Optional[List[str]] = None) -> int:
    """Run one task; exit 0 complete, 3 complete with flagged rows, 1 failed, 130 interrupted"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    overrides = {'out': args.out, 'format': args.format, 'workers': args.workers,
                 'frame': args.frame, 'seed': args.seed}
    try:
        config = parse_config(args.config, task=args.task, overrides=overrides)
        table = run(config)
        table.write(config.output_path, config.output_format)
    except KeyboardInterrupt:
        logger.error('Run interrupted')
        return EXIT_INTERRUPTED
    except QptError as e:
        summary = error_summary(e)
        logger.error(f"{summary['kind']}: {summary['message']}")
        sys.stderr.write(dump_json(summary))
        return summary['exit_code']
    except Exception as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        sys.stderr.write(dump_json(error_summary(e)))
        return EXIT_FAILED

    logger.info(f"Run finished - {table.metadata['status']}, stats {sweep_manager.get_stats()}")
    return EXIT_FLAGGED if table.flagged_rows else EXIT_COMPLETE


if __name__ == '__main__':
    sys.exit(main())
