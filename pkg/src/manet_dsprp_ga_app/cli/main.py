import argparse
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from manet_dsprp_ga_app.bench_ops.bench_ops_api import BenchOpsApi
from manet_dsprp_ga_app.bench_ops.experiment_config import ExperimentConfig, parse_config
from manet_dsprp_ga_app.utils.log_utils import LogUtils
from manet_dsprp_ga_app.utils.property_utils import PropertyUtils, property_validation

OPERATION_MODES = ("run_experiment", "compare_schemes", "generate_topology", "solve_topology")


def _props(config_file):
    if config_file and Path(config_file).suffix.lower() in (".yaml", ".yml"):
        return PropertyUtils().get_yaml_config_properties(config_file)
    return {}


def _with_results_dir(config: ExperimentConfig, props) -> ExperimentConfig:
    results_dir = property_validation(props, "app.results_dir", str, default=None)
    if results_dir and not Path(config.out).is_absolute():
        return replace(config, out=str(Path(results_dir) / config.out))
    return config


def main(argv=None):
    parser = argparse.ArgumentParser(description="CLI Dispatcher", add_help=False)
    parser.add_argument("--operation_mode", type=str, default="run_experiment", choices=OPERATION_MODES)
    parser.add_argument("--log-level", dest="log_level", type=str, default="INFO")
    parser.add_argument("--config", "--config_file_path", dest="config", default=None)

    argv = sys.argv[1:] if argv is None else list(argv)
    args, _ = parser.parse_known_args(argv)

    operation = args.operation_mode

    try:
        props = _props(args.config)
        log = LogUtils().get_time_rotated_log(props, level=args.log_level)
        config = _with_results_dir(parse_config(argv, require_scheme=operation != "generate_topology"), props)
        api = BenchOpsApi(log)

        if operation == "generate_topology":
            api.generate_topology(config)

        elif operation == "solve_topology":
            api.print_static(api.solve_topology(config))

        elif operation == "compare_schemes" or len(config.schemes) > 1:
            result = api.compare_schemes([config.with_scheme(s) for s in config.schemes])
            api.write_outputs(result, config.out)
            api.print_summary(result)

        else:
            result = api.run_experiment(config)
            api.write_outputs(result, config.out)
            api.print_summary(result)

    except Exception as e:
        print("Error:", e)
        print(traceback.format_exc())
        raise


if __name__ == "__main__":
    main()
