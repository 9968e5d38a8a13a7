"""``daa`` command-line frontend.

Data goes to the files named by ``--out``-style flags (stdout by default);
diagnostics go to stderr. Library errors map to exit codes through
:attr:`DaaError.exit_code`.
"""

import logging
import sys
from pathlib import Path

import click

from docking_attention import __version__
from docking_attention.analysis import (
    export_attention_profiles,
    parse_ranked_predictions,
    pca_project,
    top_k_accuracy,
    two_proportion_z_test,
)
from docking_attention.attention import (
    VARIANTS,
    DaaOutput,
    format_params,
    grad_check,
    init_params,
    multi_head_forward,
    parse_params,
)
from docking_attention.config import (
    ALPHA,
    DEFAULT_BETA,
    DEFAULT_DIMS,
    DEFAULT_GAMMA,
    DEFAULT_K_LIST,
    DEFAULT_LJ,
    DEFAULT_TOY,
    DEFAULT_TRAIN,
)
from docking_attention.errors import DaaError, GradientCheckFailed, ValidationError
from docking_attention.ljscore import LjParams, Transform, format_profile, score_pipeline
from docking_attention.readers import (
    EmbeddingTsvReader,
    PoseXyzReader,
    identify_protein_reader,
    read_text,
)
from docking_attention.structures import (
    format_embeddings_tsv,
    format_float,
    format_pose_xyz,
)
from docking_attention.synth import synth_embeddings, synth_pose_ensemble
from docking_attention.train import (
    TrainConfig,
    compare_runs,
    format_comparison,
    format_history,
    make_toy_task,
    run_ablation_suite,
)

logger = logging.getLogger(__name__)

__all__ = ["cli", "main"]


class DaaGroup(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except DaaError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


def _out_option(flag="--out", help="Output file ('-' for stdout)."):
    return click.option(flag, type=click.File("w"), default="-", show_default=True, help=help)


def _lj_options(func):
    options = [
        click.option("--eps", type=float, default=DEFAULT_LJ.epsilon, show_default=True, help="LJ well depth ε."),
        click.option("--sigma", type=float, default=DEFAULT_LJ.sigma, show_default=True, help="LJ zero-crossing distance σ (Å)."),
        click.option("--rmin", type=float, default=DEFAULT_LJ.r_min_clamp, show_default=True, help="Distance clamp (Å)."),
        click.option(
            "--transform",
            type=click.Choice([t.value for t in Transform]),
            default=DEFAULT_LJ.transform.value,
            show_default=True,
        ),
        click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _input_options(func):
    func = click.option(
        "--poses", multiple=True, required=True, help="XYZ pose file; repeat once per pose."
    )(func)
    return click.option("--protein", required=True, help="Residue TSV or PDB file.")(func)


def _load_profile(protein_path, pose_paths, eps, sigma, rmin, transform, beta, threads):
    protein = identify_protein_reader(protein_path).extract_file(protein_path)
    poses = PoseXyzReader().extract_files(pose_paths)
    params = LjParams(epsilon=eps, sigma=sigma, r_min_clamp=rmin, transform=transform)
    logger.info("scoring %d residues against %d pose(s)", protein.n, poses.k)
    return protein, params, score_pipeline(protein, poses, params, beta, threads=threads)


@click.group(cls=DaaGroup, context_settings=dict(help_option_names=["-h", "--help"]))
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Debug-level diagnostics on stderr.")
def cli(verbose):
    """Docking-aware attention: interaction scoring, pooling, training and analysis."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


@cli.command()
@_input_options
@_lj_options
@click.option("--beta", type=float, default=DEFAULT_BETA, show_default=True)
@_out_option()
def score(protein, poses, eps, sigma, rmin, transform, threads, beta, out):
    """Per-residue interaction profile (raw, transformed, smoothed)."""
    _, params, profile = _load_profile(protein, poses, eps, sigma, rmin, transform, beta, threads)
    out.write(format_profile(profile, params))


@cli.command()
@_input_options
@_lj_options
@click.option("--embeddings", required=True, help="n×d embedding TSV, rows in residue order.")
@click.option("--params", "params_path", help="Parameter bundle to pool with.")
@click.option("--init", "init_seed", type=int, help="Initialise parameters from this seed instead.")
@click.option("--heads", type=click.IntRange(min=1), default=1, show_default=True, help="Heads (with --init).")
@click.option("--gamma", type=float, help="Override γ.")
@click.option("--beta", type=float, help="Override β.")
@click.option("--ablation", type=click.Choice(list(VARIANTS)), default="full", show_default=True)
@_out_option()
@click.option("--attention-out", type=click.File("w"), help="Attention profile output.")
def pool(
    protein, poses, eps, sigma, rmin, transform, threads,
    embeddings, params_path, init_seed, heads, gamma, beta, ablation, out, attention_out,
):
    """Context representation p_M of one protein for one ligand."""
    E = EmbeddingTsvReader().extract_file(embeddings)
    if (params_path is None) == (init_seed is None):
        raise ValidationError("give exactly one of --params and --init")
    if ablation == "standard" and gamma is not None:
        raise ValidationError("--gamma has no effect with --ablation standard")
    if params_path is not None:
        if heads != 1:
            raise ValidationError("--heads only applies with --init")
        head_params = [parse_params(read_text(params_path))]
    else:
        head_params = [
            init_params(
                E.d, DEFAULT_DIMS.d_h, DEFAULT_DIMS.d_v, seed=init_seed + h,
                gamma=DEFAULT_GAMMA, beta=DEFAULT_BETA,
            )
            for h in range(heads)
        ]
    overrides = {k: v for k, v in (("gamma", gamma), ("beta", beta)) if v is not None}
    head_params = [p.replace(**overrides) for p in head_params]

    smoothing = head_params[0].beta
    prot, _, profile = _load_profile(protein, poses, eps, sigma, rmin, transform, smoothing, threads)
    E.check_pairs_with(prot)

    output = multi_head_forward(E.values, profile.smoothed, head_params, variant=ablation)
    # γ has no effect without the docking term
    gamma_used = 0.0 if ablation == "standard" else head_params[0].gamma
    lines = [
        f"# gamma {format_float(gamma_used)}",
        f"# beta {format_float(smoothing)}",
        f"# heads {len(head_params)}",
        "dim\tvalue",
    ]
    lines += [f"{j + 1}\t{format_float(v)}" for j, v in enumerate(output.representation)]
    out.write("\n".join(lines) + "\n")

    if attention_out is not None:
        columns = {
            ("weight" if len(head_params) == 1 else f"head{h + 1}"): DaaOutput(
                representation=output.representation,
                weights=output.weights[h],
                logits=output.logits[h],
            )
            for h in range(len(head_params))
        }
        attention_out.write(export_attention_profiles(columns, prot))


@cli.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--d", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--d-h", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--d-v", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--ablation", type=click.Choice(list(VARIANTS)), default="full", show_default=True)
@click.option(
    "--corrupt",
    type=click.Choice(["w_q", "w_k", "w_v", "q_pool", "gamma", "s_hat"]),
    hidden=True,
)
@_out_option()
def gradcheck(seed, n, d, d_h, d_v, ablation, corrupt, out):
    """Analytic gradients against central finite differences."""
    report = grad_check(seed, n=n, d=d, d_h=d_h, d_v=d_v, variant=ablation, corrupt=corrupt)
    out.write(report.format())
    if not report.passed:
        failed = ", ".join(k for k, e in report.errors.items() if e >= report.tolerance)
        raise GradientCheckFailed(f"gradient check failed for {failed}")


@cli.command("train-toy")
@click.option("--seed", type=int, default=DEFAULT_TRAIN.seed, show_default=True)
@click.option("--steps", type=click.IntRange(min=0), default=DEFAULT_TRAIN.steps, show_default=True)
@click.option("--lr", type=float, default=DEFAULT_TRAIN.learning_rate, show_default=True)
@click.option("--l2", type=float, default=DEFAULT_TRAIN.l2, show_default=True)
@click.option("--samples", type=int, default=DEFAULT_TOY.n_samples, show_default=True)
@click.option("--residues", type=int, default=DEFAULT_TOY.n, show_default=True)
@click.option("--dim", type=int, default=DEFAULT_TOY.d, show_default=True)
@_out_option(help="Metrics history of every run.")
@_out_option("--summary-out", help="Per-run accuracies and pairwise z-tests.")
@click.option("--params-out", type=click.File("w"), help="Trained full-DAA parameter bundle.")
def train_toy(seed, steps, lr, l2, samples, residues, dim, out, summary_out, params_out):
    """Full DAA, both ablations and a static baseline on one seeded toy task."""
    task = make_toy_task(samples, residues, dim, seed)
    config = TrainConfig(
        learning_rate=lr, steps=steps, seed=seed, l2=l2,
        d_h=DEFAULT_TRAIN.d_h, d_v=DEFAULT_TRAIN.d_v,
    )
    results = run_ablation_suite(task, config)
    out.write("".join(format_history(r) for r in results.values()))

    lines = [f"# alpha {format_float(ALPHA)}", "run\ttest_correct\ttest_total\ttest_acc"]
    for name, r in results.items():
        m = r.metrics
        lines.append(f"{name}\t{m.test_correct}\t{m.test_total}\t{format_float(m.test_accuracy)}")
    lines.append("run_a\trun_b\tdelta\tz\tp_value\tsignificance")
    full = results["full"]
    for other in ("static", "standard", "docking"):
        lines.append(format_comparison(compare_runs(full, results[other])))
    summary_out.write("\n".join(lines) + "\n")

    if params_out is not None:
        params_out.write(format_params(full.params))


@cli.command()
@click.option("--predictions", required=True, help="truth<TAB>candidate... per line.")
@click.option("--k", "k_list", type=int, multiple=True, default=DEFAULT_K_LIST, show_default=True)
@_out_option()
def topk(predictions, k_list, out):
    """Top-k accuracy of ranked candidate lists."""
    preds = parse_ranked_predictions(read_text(predictions))
    lines = [f"# instances {len(preds)}", "k\taccuracy"]
    lines += [f"{k}\t{format_float(top_k_accuracy(preds, k))}" for k in k_list]
    out.write("\n".join(lines) + "\n")


@cli.command()
@click.argument("s1", type=int)
@click.argument("n1", type=int)
@click.argument("s2", type=int)
@click.argument("n2", type=int)
@click.option("--alpha", type=float, default=ALPHA, show_default=True)
@_out_option()
def ztest(s1, n1, s2, n2, alpha, out):
    """Two-sided pooled two-proportion z-test of S1/N1 against S2/N2."""
    result = two_proportion_z_test(s1, n1, s2, n2, alpha=alpha)
    out.write(
        "z\tp_value\tsignificant\n"
        f"{format_float(result.z)}\t{format_float(result.p_value)}\t"
        f"{'yes' if result.significant else 'no'}\n"
    )


@cli.command()
@click.option("--input", "input_path", required=True, help="Numeric TSV, one row per point.")
@click.option("--components", type=click.IntRange(min=1), default=2, show_default=True)
@_out_option()
def pca(input_path, components, out):
    """Principal-component projection of a numeric TSV."""
    X = EmbeddingTsvReader().extract_file(input_path).values
    result = pca_project(X, components)
    lines = [
        "# explained_variance " + " ".join(format_float(v) for v in result.explained_variance),
        "\t".join(f"pc{j + 1}" for j in range(components)),
    ]
    lines += ["\t".join(format_float(v) for v in row) for row in result.projected]
    out.write("\n".join(lines) + "\n")


@cli.command("synth-embeddings")
@click.option("--n", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_out_option()
def synth_embeddings_cmd(n, d, seed, out):
    """Seeded standard-normal embedding matrix."""
    out.write(format_embeddings_tsv(synth_embeddings(n, d, seed)))


@cli.command("synth-poses")
@click.option("--protein", required=True)
@click.option("--anchor", type=int, required=True, help="1-based residue the poses surround.")
@click.option("--atoms", type=int, default=5, show_default=True)
@click.option("--count", type=int, default=4, show_default=True, help="Number of poses K.")
@click.option("--spread", type=float, default=2.0, show_default=True, help="Å")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def synth_poses_cmd(protein, anchor, atoms, count, spread, seed, out_dir):
    """Seeded pose ensemble written as pose_1.xyz ... pose_K.xyz."""
    structure = identify_protein_reader(protein).extract_file(protein)
    ensemble = synth_pose_ensemble(structure, anchor, atoms, count, spread, seed)
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    for k, doc in enumerate(format_pose_xyz(ensemble), start=1):
        (target / f"pose_{k}.xyz").write_text(doc)
    logger.info("wrote %d poses to %s", ensemble.k, target)


def main():
    cli(prog_name="daa")


if __name__ == "__main__":
    main()
