"""
명령행 진입점

Example::

    python -m src.experiments.cli run toric-fig3
    python -m src.experiments.cli run s3-interfere --group s3 --h e c+ t0 --format csv-summary
    python -m src.experiments.cli script protocol.txt --mode sample --seed 7 --out result.json

종료 코드: 0 성공, 2 검증 오류, 3 프로토콜 실행 오류.
오류는 ``{"code", "message", "detail"}`` JSON 으로 stderr 에 출력합니다.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from config.settings import settings
from src.exceptions import AppError, ValidationError
from src.experiments.runner import (
    NAMED_EXPERIMENTS,
    OUTPUT_FORMATS,
    ExperimentOptions,
    emit,
    run_named_experiment,
    run_script,
)
from src.experiments.script import parse_script
from src.protocols.quantum_double import CorrectionPolicy
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--group", choices=["z2", "s3"], default=None)
    parser.add_argument("--lattice", nargs=2, type=int, metavar=("N", "M"), default=None)
    parser.add_argument("--boundary", choices=["open", "rough-smooth"], default=None)
    parser.add_argument("--mode", choices=["branch", "sample"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--prune-eps", type=float, default=None, help="가지치기 임계값")
    parser.add_argument("--out", type=Path, default=None, help="결과 파일 (기본: stdout)")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="기본: OUTPUT_FORMAT 설정")
    parser.add_argument("--jobs", type=int, default=None, help="스윕 동시 작업 수")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="양자 이중 애니온 프로토콜 시뮬레이터")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="이름 붙은 실험 실행")
    run.add_argument("experiment", choices=sorted(NAMED_EXPERIMENTS))
    _add_common(run)
    run.add_argument("--policy", choices=CorrectionPolicy.accepted_values(), default="postselect")
    run.add_argument("--h", nargs="+", default=None, help="s3-interfere 원소 (예: e c+ t0)")
    run.add_argument("--U", dest="couplings", nargs="+", type=float, default=None)
    run.add_argument("--t-braid", type=float, default=None)
    run.add_argument("--class", dest="class_rep", default=None, help="자기 전하 켤레류 대표")
    run.add_argument("--irrep", default=None, help="전기 전하 기약표현")
    run.add_argument("--background", choices=["local", "ground"], default="local")

    script = sub.add_parser("script", help="프로토콜 스크립트 실행")
    script.add_argument("path", type=Path)
    _add_common(script)
    return parser


# --group 을 생략했을 때의 실험별 기본 군
DEFAULT_GROUPS = {"s3-interfere": "s3", "magnetic-fusion": "s3", "electric-fusion": "s3"}


def _options(args: argparse.Namespace) -> ExperimentOptions:
    default_group = DEFAULT_GROUPS.get(getattr(args, "experiment", ""), "z2")
    values = {
        "group": args.group or default_group,
        "lattice": tuple(args.lattice) if args.lattice else None,
        "boundary": args.boundary,
        "mode": args.mode,
        "seed": args.seed,
        "prune_epsilon": args.prune_eps,
        "jobs": args.jobs,
    }
    if args.command == "run":
        values.update(
            policy=args.policy,
            h=args.h or [],
            couplings=args.couplings or [],
            t_braid=args.t_braid,
            class_rep=args.class_rep,
            irrep=args.irrep,
            background=args.background,
        )
    return ExperimentOptions(**values)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(
            f"결과 파일에 쓸 수 없습니다: {out}", detail={"path": str(out), "reason": str(exc)}
        ) from None
    logger.info("결과 저장: %s", out)


def main(argv: list[str] | None = None) -> int:
    """CLI 엔트리포인트. 프로세스 종료 코드를 반환합니다."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        options = _options(args)
        if args.command == "run":
            document = run_named_experiment(args.experiment, options)
        else:
            try:
                text = args.path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ValidationError(
                    f"스크립트를 읽을 수 없습니다: {args.path}", detail={"reason": str(exc)}
                ) from None
            script = parse_script(text)
            if args.group is not None and args.group != script.group:
                raise ValidationError(
                    "스크립트 헤더와 --group 이 다릅니다.",
                    detail={"script": script.group, "flag": args.group},
                )
            document = run_script(script, options)
        _write(emit(document, args.format or settings.output_format), args.out)
    except AppError as exc:
        logger.warning("실행 실패: %s (%s)", exc.message, exc.code)
        sys.stderr.write(json.dumps(exc.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        return exc.exit_code
    return 0


if __name__ == "__main__":  # pragma: no cover - CLI 진입점
    sys.exit(main())
