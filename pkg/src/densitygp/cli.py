"""
Command-line entry point: ``python -m densitygp <command>``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from .config import OPTIMIZERS, RunConfig, load_config
from .covariance import ALLOWED_NU, KERNEL_FORMS
from .dataio import densities_frame, read_dataset, write_dataset, write_frame, write_json
from .datasets import gen_classification_beta, gen_classification_invgamma, gen_regression_tfb
from .diagnostics import gradient_check, isometry_report
from .errors import DensityGPError, UsageError
from .geometry import frechet_mean
from .logging_setup import setup_logging
from .pipeline import evaluate_model, fit_model, predict_model, run_repetitions, summarize
from .serialization import load_model, save_model

logger = logging.getLogger(__name__)

DATASET_KINDS = ('tfb', 'beta', 'invgamma')
TASKS = ('regress', 'classify')


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='base random seed')
    common.add_argument('--grid-size', type=int, default=None, help='grid points on [0, 1]')
    common.add_argument('--config', default=None, help='json5 config file')
    common.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    return common


def _data_flags() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument('--no-header', action='store_true', help='CSV files have no header row')
    data.add_argument('--samples', action='store_true',
                      help='rows are sample batches to be KDE-estimated')
    return data


def _model_flags() -> argparse.ArgumentParser:
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument('--noise-var', type=float, default=None, help='regression noise variance')
    model.add_argument('--nu', type=float, nargs='+', default=None, choices=ALLOWED_NU,
                       help='candidate smoothness values (more than one triggers cross-validation)')
    model.add_argument('--optimizer', choices=OPTIMIZERS, default=None)
    model.add_argument('--kernel-form', choices=KERNEL_FORMS, default=None)
    model.add_argument('--folds', type=int, default=None)
    return model


def build_parser() -> argparse.ArgumentParser:
    common, data, model = _common_flags(), _data_flags(), _model_flags()
    parser = argparse.ArgumentParser(prog='densitygp',
                                     description='Gaussian processes on probability densities')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', parents=[common], help='generate a synthetic dataset')
    gen.add_argument('kind', choices=DATASET_KINDS)
    gen.add_argument('--n', type=int, default=None, help='number of densities (both classes together)')
    gen.add_argument('--noise', type=float, default=None)
    gen.add_argument('--shift', type=float, default=None, help='class parameter shift')
    gen.add_argument('--sample-size', type=int, default=500, help='draws per TFB density')
    gen.add_argument('--out', required=True, help='output CSV (a .json sidecar is written next to it)')

    fit = sub.add_parser('fit', parents=[common, data, model], help='fit a model')
    fit.add_argument('task', choices=TASKS)
    fit.add_argument('data')
    fit.add_argument('--model', required=True, help='output model file')
    fit.add_argument('--report', default=None, help='output JSON fit report')

    predict = sub.add_parser('predict', parents=[common, data], help='predict with a saved model')
    predict.add_argument('model')
    predict.add_argument('data')
    predict.add_argument('--out', required=True, help='output predictions CSV')

    evaluate = sub.add_parser('eval', parents=[common, data, model], help='evaluate a model')
    evaluate.add_argument('data')
    evaluate.add_argument('--model', default=None, help='saved model; omit for repetition mode')
    evaluate.add_argument('--task', choices=TASKS, default=None)
    evaluate.add_argument('--repetitions', type=int, default=None)
    evaluate.add_argument('--split-fraction', type=float, default=None)
    evaluate.add_argument('--workers', type=int, default=None)
    evaluate.add_argument('--report', default=None, help='output JSON metrics report')
    evaluate.add_argument('--out', default=None, help='per-repetition CSV (repetition mode)')

    mean = sub.add_parser('frechet-mean', parents=[common, data], help='intrinsic mean densities')
    mean.add_argument('data')
    mean.add_argument('--out', required=True)
    mean.add_argument('--by-label', action='store_true', help='one mean per label value')

    diagnose = sub.add_parser('diagnose', parents=[common, data], help='gradient and isometry checks')
    diagnose.add_argument('check', choices=('gradient', 'isometry'))
    diagnose.add_argument('--task', choices=TASKS, default='regress')
    diagnose.add_argument('--instances', type=int, default=50)
    diagnose.add_argument('--data', default=None, help='densities for the isometry check')
    diagnose.add_argument('--out', default=None, help='output CSV')
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < explicit flags."""
    config = load_config(args.config)
    return config.with_overrides(
        seed=args.seed,
        grid_size=args.grid_size,
        noise_var=getattr(args, 'noise_var', None),
        nu_candidates=getattr(args, 'nu', None),
        optimizer=getattr(args, 'optimizer', None),
        kernel_form=getattr(args, 'kernel_form', None),
        folds=getattr(args, 'folds', None),
        repetitions=getattr(args, 'repetitions', None),
        split_fraction=getattr(args, 'split_fraction', None),
        workers=getattr(args, 'workers', None),
    )


def _read(args, config: RunConfig, task=None, with_response=True, grid_size=None):
    return read_dataset(args.data, task=task, no_header=args.no_header, samples=args.samples,
                        with_response=with_response, grid_size=grid_size or config.grid_size)


def cmd_gen(args, config: RunConfig) -> int:
    if args.kind == 'tfb':
        dataset = gen_regression_tfb(n=args.n or 100, noise=0.01 if args.noise is None else args.noise,
                                     sample_size=args.sample_size, seed=config.seed,
                                     grid_size=config.grid_size)
    else:
        generator = gen_classification_beta if args.kind == 'beta' else gen_classification_invgamma
        kwargs = {'n_per_class': (args.n or 200) // 2, 'seed': config.seed, 'grid_size': config.grid_size}
        if args.noise is not None:
            kwargs['noise'] = args.noise
        if args.shift is not None:
            kwargs['param_shift'] = args.shift
        dataset = generator(**kwargs)
    sidecar = write_dataset(dataset, args.out)
    logger.info(f"✅ Wrote {len(dataset.densities)} {args.kind} densities to {args.out} (+ {sidecar})")
    return 0


def cmd_fit(args, config: RunConfig) -> int:
    data = _read(args, config, task=args.task)
    if data.responses is None:
        raise UsageError(f"{args.data}: no target/label column to fit against")
    logger.info(f"🚀 Fitting {args.task} model on {len(data.densities)} densities")
    model, report = fit_model(args.task, data.densities, data.responses, config)
    save_model(model, args.model)
    if args.report:
        write_json({'command': 'fit', 'config': config.to_dict(), **report.to_dict()}, args.report)
    logger.info(f"✅ Model saved to {args.model}")
    return 0


def cmd_predict(args, config: RunConfig) -> int:
    model = load_model(args.model)
    data = _read(args, config, task=model.task, with_response=False, grid_size=model.grid_size)
    write_frame(predict_model(model, data.densities), args.out)
    logger.info(f"✅ Wrote {len(data.densities)} predictions to {args.out}")
    return 0


def cmd_eval(args, config: RunConfig) -> int:
    if args.model is None:
        return _eval_repetitions(args, config)
    model = load_model(args.model)
    if args.task is not None:
        model.require_task(args.task)
    data = _read(args, config, task=model.task, grid_size=model.grid_size)
    if data.responses is None:
        raise UsageError(f"{args.data}: no target/label column to evaluate against")
    metrics = evaluate_model(model, data.densities, data.responses)
    print(pd.DataFrame([metrics]).to_string(index=False))
    if args.report:
        write_json({'command': 'eval', 'config': config.to_dict(), 'task': model.task,
                    'params': model.params.to_dict(), 'metrics': metrics}, args.report)
    return 0


def _eval_repetitions(args, config: RunConfig) -> int:
    if args.task is None:
        raise UsageError("repetition mode needs --task")
    data = _read(args, config, task=args.task)
    if data.responses is None:
        raise UsageError(f"{args.data}: no target/label column to evaluate against")
    frame = run_repetitions(args.task, data.densities, data.responses, config)
    summary = summarize(frame)
    print(summary[['formatted', 'count']].to_string())
    if args.out:
        write_frame(frame, args.out)
    if args.report:
        write_json({'command': 'eval', 'config': config.to_dict(), 'task': args.task,
                    'summary': summary[['mean', 'std', 'count']].to_dict(orient='index')}, args.report)
    return 0


def cmd_frechet_mean(args, config: RunConfig) -> int:
    data = _read(args, config, task='classify' if args.by_label else None, with_response=args.by_label)
    if args.by_label:
        if data.responses is None:
            raise UsageError("--by-label needs a label column")
        groups = sorted(set(np.asarray(data.responses).tolist()))
        means = [frechet_mean([p for p, r in zip(data.densities, data.responses) if r == g]) for g in groups]
    else:
        groups = ['all']
        means = [frechet_mean(data.densities)]
    frame = densities_frame(means)
    frame.insert(0, 'group', groups)
    write_frame(frame, args.out)
    logger.info(f"✅ Wrote {len(means)} mean densities to {args.out}")
    return 0


def cmd_diagnose(args, config: RunConfig) -> int:
    if args.check == 'gradient':
        frame = gradient_check(args.task, n_instances=args.instances, seed=config.seed)
        print(frame['rel_error'].describe().to_string())
    else:
        if args.data is None:
            raise UsageError("isometry check needs --data")
        data = _read(args, config, with_response=False)
        frame = isometry_report(data.densities)
        print(frame[['chord', 'geodesic', 'difference']].describe().to_string())
    if args.out:
        write_frame(frame, args.out)
    return 0


def _write_error_report(args, exc: DensityGPError) -> None:
    path = getattr(args, 'report', None)
    if not path:
        return
    try:
        write_json({'command': args.command, 'error': exc.to_dict()}, path)
    except DensityGPError as report_exc:
        logger.warning(f"⚠️ Could not write error report: {report_exc}")


COMMANDS = {
    'gen': cmd_gen,
    'fit': cmd_fit,
    'predict': cmd_predict,
    'eval': cmd_eval,
    'frechet-mean': cmd_frechet_mean,
    'diagnose': cmd_diagnose,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except DensityGPError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        _write_error_report(args, exc)
        return exc.exit_code


if __name__ == '__main__':
    sys.exit(main())
