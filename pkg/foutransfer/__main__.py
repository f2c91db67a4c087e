import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from foutransfer.cli import (
	RunConfig,
	cmd_predict,
	cmd_simulate,
	cmd_transfer,
	cmd_verify,
)
from foutransfer.config import conf
from foutransfer.consts import (
	APP_NAME,
	DEFAULT_SEED,
	ExitCode,
	ProcessKind,
	TransferDirection,
	VerifySuite,
)
from foutransfer.errors import FouTransferError, ParameterError
from foutransfer.grid import Grid
from foutransfer.kernels import FouParams
from foutransfer.logger import install_excepthook, setup_logging

log = logging.getLogger(__name__)

VERIFY_PATHS = 10_000

TOLERANCE_FLAGS = {
	"tol_gram": "gram_relative",
	"tol_reduction": "reduction",
	"tol_roundtrip": "roundtrip_relative",
	"tol_refinement_ratio": "refinement_ratio",
	"tol_transfer": "transfer_integral",
	"tol_prediction": "prediction_relative",
	"tol_mc_se": "monte_carlo_se",
}


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
	model = parser.add_argument_group("model")
	model.add_argument("--theta", type=float, default=1.0)
	model.add_argument("--sigma", type=float, default=1.0)
	model.add_argument("--hurst", type=float, default=0.5)
	model.add_argument("--T", type=float, default=1.0, help="Time horizon")
	model.add_argument("--n", type=int, default=256, help="Number of steps")
	run = parser.add_argument_group("run")
	run.add_argument(
		"--paths", type=int, default=None, help="Number of paths to sample"
	)
	run.add_argument("--seed", type=int, default=DEFAULT_SEED)
	run.add_argument(
		"--output-dir",
		type=Path,
		default=None,
		help="Output directory (default: FOUTRANSFER_OUTPUT_DIR or config)",
	)
	run.add_argument("--workers", type=int, default=None)
	run.add_argument("--batch-size", type=int, default=None)
	run.add_argument(
		"--refinement",
		type=int,
		default=None,
		help="Cells of the covariance quadrature grid",
	)
	tolerances = parser.add_argument_group("tolerances")
	for flag in TOLERANCE_FLAGS:
		tolerances.add_argument(
			f"--{flag.replace('_', '-')}", type=float, default=None
		)


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(
		prog=APP_NAME,
		description="Transfer principle for fractional Ornstein-Uhlenbeck "
		"processes: simulation, path transforms, prediction and checks.",
	)
	parser.add_argument(
		"--log_level",
		"-L",
		help="Set the logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
		default=None,
	)
	parser.add_argument(
		"--no-log-file",
		help="Log to the console only",
		action="store_true",
	)
	commands = parser.add_subparsers(dest="command", required=True)

	simulate = commands.add_parser("simulate", help="Sample paths")
	simulate.add_argument(
		"--process",
		choices=[p.value for p in ProcessKind],
		default=ProcessKind.FOU.value,
	)
	simulate.add_argument(
		"--method",
		choices=["transfer", "cholesky"],
		default="transfer",
		help="fbm only: sample through the kernel or the exact covariance",
	)
	_add_common_arguments(simulate)

	transfer = commands.add_parser("transfer", help="Transform paths")
	transfer.add_argument("--input", type=Path, required=True)
	transfer.add_argument(
		"--direction",
		choices=[d.value for d in TransferDirection],
		required=True,
	)
	transfer.add_argument(
		"--round-trip",
		action="store_true",
		help="Also write the sup-norm reconstruction error per path",
	)
	transfer.add_argument(
		"--dump-kernel",
		action="store_true",
		help="Write the discretized kernel as i,j,value",
	)
	_add_common_arguments(transfer)

	predict = commands.add_parser("predict", help="Predict an fOU path")
	predict.add_argument("--input", type=Path, required=True)
	predict.add_argument("--u", type=float, required=True, help="Base time")
	predict.add_argument("--targets", type=float, nargs="+", required=True)
	predict.add_argument("--path-id", type=int, default=0)
	predict.add_argument(
		"--oracle",
		action="store_true",
		help="Compare with Gaussian conditioning on the grid values",
	)
	_add_common_arguments(predict)

	verify = commands.add_parser("verify", help="Run verification suites")
	verify.add_argument(
		"--suite", choices=[s.value for s in VerifySuite], required=True
	)
	_add_common_arguments(verify)
	return parser


def parse_args(
	argv=None,
) -> tuple[argparse.ArgumentParser, argparse.Namespace]:
	parser = build_parser()
	return parser, parser.parse_args(argv)


def build_run_config(
	parser: argparse.ArgumentParser, args: argparse.Namespace
) -> RunConfig:
	"""Validate the flags, reporting the offending one as a usage error."""
	settings = conf()
	try:
		params = FouParams(args.theta, args.sigma, args.hurst)
		grid = Grid(args.T, args.n)
	except ParameterError as e:
		parser.error(f"argument --{e.name}: {e}")
	overrides = {
		field: getattr(args, flag)
		for flag, field in TOLERANCE_FLAGS.items()
		if getattr(args, flag) is not None
	}
	paths = args.paths
	if paths is None:
		paths = VERIFY_PATHS if args.command == "verify" else 1
	try:
		return RunConfig(
			command=args.command,
			params=params,
			grid=grid,
			paths=paths,
			seed=args.seed,
			output_dir=args.output_dir or settings.output_dir,
			workers=args.workers or settings.runtime.workers,
			batch_size=args.batch_size or settings.runtime.batch_size,
			refinement=args.refinement
			or settings.numerics.covariance_refinement,
			tolerances=settings.tolerances.model_dump() | overrides,
		)
	except ValidationError as e:
		error = e.errors()[0]
		flag = str(error["loc"][-1])
		if error["loc"][0] == "tolerances":
			flag = {v: k for k, v in TOLERANCE_FLAGS.items()}.get(flag, flag)
		flag = flag.replace("_", "-")
		parser.error(f"argument --{flag}: {error['msg']}")


def run(args: argparse.Namespace, config: RunConfig) -> ExitCode:
	match args.command:
		case "simulate":
			cmd_simulate(config, ProcessKind(args.process), args.method)
		case "transfer":
			cmd_transfer(
				config,
				args.input,
				TransferDirection(args.direction),
				args.round_trip,
				args.dump_kernel,
			)
		case "predict":
			cmd_predict(
				config, args.input, args.u, args.targets, args.oracle, args.path_id
			)
		case "verify":
			_, checks = cmd_verify(config, VerifySuite(args.suite))
			if not all(check.passed for check in checks):
				return ExitCode.VERIFICATION_FAILED
	return ExitCode.OK


def main(argv=None) -> int:
	install_excepthook()
	parser, args = parse_args(argv)
	settings = conf()
	setup_logging(
		args.log_level or settings.general.log_level.value,
		settings.general.log_to_file and not args.no_log_file,
	)
	config = build_run_config(parser, args)
	try:
		return run(args, config)
	except FouTransferError as e:
		log.error(str(e))
		print(f"{APP_NAME}: error: {e}", file=sys.stderr)
		return ExitCode.USAGE_ERROR
	except OSError as e:
		log.error(f"cannot write outputs: {e}")
		print(f"{APP_NAME}: error: {e}", file=sys.stderr)
		return ExitCode.USAGE_ERROR


if __name__ == "__main__":
	sys.exit(main())
