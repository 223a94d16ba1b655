import argparse

from .lab import (
    run_corollary,
    run_evaluate,
    run_generate,
    run_grid_search,
    run_theorem_demo,
    run_train,
)
from .util import package_version

VERSION = package_version()


def main() -> None:

    prog = "cutsel"
    description = "Adaptive cut selection experiments"
    usage = """
    cutsel  v{VERSION}.
    Adaptive cut selection experiments
    required arguments:
        [ACTION]        The experiment to run: 'theorem', 'corollary',
        [-a, --action]  'grid', 'train', 'evaluate' or 'generate'.
    optional arguments:
        [INPUT]         Instance .json files or a corpus directory. Required
        [-i, --input]   for 'grid', 'train' and 'evaluate'.
        [OUTPUT]        Prefix of the written files, e.g. -o runs/theorem
        [-o, --output]  writes runs/theorem.csv, runs/theorem_manifest.json.
                        For 'generate' the directory of the corpus. If not
                        given, nothing will be saved.
        [MODEL]         Policy checkpoint (.ckpt) used by 'evaluate'.
        [-m, --model,
        --checkpoint]
        [GRID]          Lambda values for 'theorem' / 'corollary', either
        [-g, --grid]    "start:step:end" (end included) or a comma separated
                        list, e.g. "0:0.1:1" or "0.2,0.5".
        [MAX_ROUNDS]    Round limit of the pure cutting plane simulation.
        [-mr,           Default 1000.
        --max_rounds]
        [D]             d of the unsolvable instance for 'corollary'.
        [-d, --d]       Default 0.5.
        [EPS_TILDE]     Distance beyond max_a(d) for 'corollary'.
        [-et,           Default 0.05.
        --eps_tilde]
        [RESOLUTION]    Grid resolution for 'grid'; 10 gives 286 weight
        [-res,          vectors. Default 10.
        --resolution]
        [ROUNDS]        Separation rounds per rollout. Default 10.
        [-nr,
        --n_rounds]
        [CUTS]          Cuts added per separation round. Default 5.
        [-c,
        --cuts_per_round]
        [THRESHOLD]     Parallelism above which cuts are filtered.
        [-pt,           Default 0.9.
        --parallel_threshold]
        [EPOCHS]        Training epochs. Default 500.
        [-e, --epochs]
        [SAMPLES]       Actions sampled per instance and epoch. Default 20.
        [-s, --samples]
        [SEEDS]         Initialization seeds tried by the seed search.
        [-ns,           Default 1000.
        --n_seeds]
        [KIND]          Corpus kind for 'generate': 'packing', 'covering',
        [-k, --kind]    'lotsizing' or 'family'.
        [COUNT]         Number of generated instances. Default 10.
        [-n, --count]
        [SEED]          Global seed. Overrides $CUTSEL_SEED; both default to
        [--seed]        0.
        [JOBS]          Parallel rollout workers. Default 1.
        [-j, --n_jobs]
        [VERBOSE]       Verbosity. Int.
        [-v,            0: Warnings
        --verbose,      1: Info
        --verbosity]    2: Debug
                        3: Errors
                        4: Critical
        [LOGS]          Where to save log file. If not given, logs will be
        [-l,            printed out.
        --logs]
        [VERSION]       Display the version of the package.
        [-V, --version]
        [HELP]          Show this help message and exit.
        [-h, --help]
    exit codes:
        0 success, 1 expectation violated, 2 usage or input error
    """.format(
        VERSION=VERSION
    )

    parser = argparse.ArgumentParser(
        prog=prog, usage=usage, description=description, add_help=False
    )

    # ACTION argument
    help = "The experiment to run."
    parser.add_argument(
        "-a",
        "--action",
        type=str,
        help=help,
        choices=["theorem", "corollary", "grid", "train", "evaluate", "generate"],
        default=None,
        required=True,
    )

    # INPUT argument
    help = "Instance .json files or a corpus directory."
    parser.add_argument(
        "-i", "--input", type=str, nargs="+", help=help, default=None, required=False
    )

    # OUTPUT argument
    help = (
        "Prefix of the written files. For 'generate' the directory of the "
        + "corpus. If not given, nothing will be saved."
    )
    parser.add_argument(
        "-o", "--output", type=str, help=help, default="", required=False
    )

    # MODEL argument
    help = "Policy checkpoint (.ckpt) used by 'evaluate'."
    parser.add_argument(
        "-m",
        "--model",
        "--checkpoint",
        type=str,
        help=help,
        default=None,
        required=False,
    )

    # GRID argument
    help = 'Lambda values, "start:step:end" or a comma separated list.'
    parser.add_argument("-g", "--grid", type=str, help=help, default=None)

    # MAX_ROUNDS argument
    help = "Round limit of the pure cutting plane simulation."
    parser.add_argument("-mr", "--max_rounds", type=int, help=help, default=1000)

    # D argument
    help = "d of the unsolvable instance for 'corollary'."
    parser.add_argument("-d", "--d", type=float, help=help, default=0.5)

    # EPS_TILDE argument
    help = "Distance beyond max_a(d) for 'corollary'."
    parser.add_argument("-et", "--eps_tilde", type=float, help=help, default=0.05)

    # RESOLUTION argument
    help = "Grid resolution for 'grid'."
    parser.add_argument("-res", "--resolution", type=int, help=help, default=10)

    # ROUNDS argument
    help = "Separation rounds per rollout."
    parser.add_argument("-nr", "--n_rounds", type=int, help=help, default=10)

    # CUTS argument
    help = "Cuts added per separation round."
    parser.add_argument("-c", "--cuts_per_round", type=int, help=help, default=5)

    # THRESHOLD argument
    help = "Parallelism above which cuts are filtered."
    parser.add_argument(
        "-pt", "--parallel_threshold", type=float, help=help, default=0.9
    )

    # EPOCHS argument
    help = "Training epochs."
    parser.add_argument("-e", "--epochs", type=int, help=help, default=500)

    # SAMPLES argument
    help = "Actions sampled per instance and epoch."
    parser.add_argument("-s", "--samples", type=int, help=help, default=20)

    # SEEDS argument
    help = "Initialization seeds tried by the seed search."
    parser.add_argument("-ns", "--n_seeds", type=int, help=help, default=1000)

    # KIND argument
    help = "Corpus kind for 'generate'."
    parser.add_argument(
        "-k",
        "--kind",
        type=str,
        help=help,
        choices=["packing", "covering", "lotsizing", "family"],
        default="packing",
    )

    # COUNT argument
    help = "Number of generated instances."
    parser.add_argument("-n", "--count", type=int, help=help, default=10)

    # SEED argument
    help = "Global seed, overrides $CUTSEL_SEED."
    parser.add_argument("--seed", type=int, help=help, default=None)

    # JOBS argument
    help = "Parallel rollout workers."
    parser.add_argument("-j", "--n_jobs", type=int, help=help, default=1)

    # VERBOSE argument
    help = "Verbosity"
    parser.add_argument(
        "-v",
        "--verbose",
        "--verbosity",
        type=int,
        help=help,
        default=1,
        required=False,
    )

    # LOGS argument
    help = "Where to save log file. If not given, logs will be printed out."
    parser.add_argument("-l", "--logs", type=str, help=help, default="", required=False)

    # VERSION argument
    help = "Version"
    parser.add_argument(
        "-V", "--version", action="version", version=prog + ": v{VERSION}.".format(VERSION=VERSION), help=help
    )

    # HELP argument
    help = "Show this message and exit"
    parser.add_argument("-h", "--help", action="store_true", help=help)

    arguments = parser.parse_args()
    if arguments.help:
        parser.print_help()
        raise SystemExit(0)

    needs_input = arguments.action in ("grid", "train", "evaluate")
    if needs_input and arguments.input is None:
        parser.error(f"The action '{arguments.action}' needs -i/--input.")
    if arguments.action == "evaluate" and arguments.model is None:
        parser.error("The action 'evaluate' needs -m/--model.")

    common = {"verbose": arguments.verbose, "logs": arguments.logs}
    separation = {
        "rounds": arguments.n_rounds,
        "cuts_per_round": arguments.cuts_per_round,
        "parallel_threshold": arguments.parallel_threshold,
    }

    if arguments.action == "theorem":
        res = run_theorem_demo(
            grid_spec=arguments.grid or "0:0.1:1",
            max_rounds=arguments.max_rounds,
            output=arguments.output,
            **common,
        )
    elif arguments.action == "corollary":
        res = run_corollary(
            d=arguments.d,
            eps_tilde=arguments.eps_tilde,
            grid_spec=arguments.grid or "0:0.001:1",
            max_rounds=arguments.max_rounds,
            output=arguments.output,
            **common,
        )
    elif arguments.action == "grid":
        res = run_grid_search(
            arguments.input,
            resolution=arguments.resolution,
            output=arguments.output,
            n_jobs=arguments.n_jobs,
            **separation,
            **common,
        )
    elif arguments.action == "train":
        res = run_train(
            arguments.input,
            epochs=arguments.epochs,
            samples=arguments.samples,
            seeds=arguments.n_seeds,
            seed=arguments.seed,
            output=arguments.output,
            n_jobs=arguments.n_jobs,
            **separation,
            **common,
        )
    elif arguments.action == "evaluate":
        res = run_evaluate(
            arguments.model,
            arguments.input,
            output=arguments.output,
            **separation,
            **common,
        )
    else:
        res = run_generate(
            kind=arguments.kind,
            count=arguments.count,
            seed=arguments.seed,
            output=arguments.output,
            **common,
        )

    if res["status_code"] != 0:
        print(res["status"])
    raise SystemExit(res["status_code"])
