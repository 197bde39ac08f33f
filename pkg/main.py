#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
NashStream
명령줄 진입점

예측 없는 온라인 내쉬 복지 할당 알고리즘의 인스턴스 생성, 실행, 벤치마크, 비율 계산
종료 코드: 0 성공, 1 데이터 오류, 2 사용법 오류, 3 감사 실패, 4 솔버 비수렴 (strict)
"""

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import List, Optional

# 프로젝트 루트를 Python 경로에 추가
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

try:
    from src.core.bench_runner import BenchRunner, BenchSuite, InstanceContext
    from src.core.eisenberg_gale import solve_eg
    from src.core.exceptions import (
        AuditViolationError,
        InstanceFormatError,
        NashStreamError,
        PreconditionError,
        RefusalError,
        SolverNonconvergenceError,
        UndefinedRatioError,
    )
    from src.core.instance_generator import generate
    from src.core.invariant_auditor import audit_trace
    from src.core.online_allocators import ALGORITHMS, GUESSED_ALGORITHMS, run_algorithm
    from src.core.welfare import balance_ratio, monopolist_utilities, ratio_report
    from src.models.generator_spec import FAMILIES, HARD_FAMILIES, GeneratorSpec, normalize_family
    from src.utils.config import THREADS_ENV, config
    from src.utils.data_manager import DataManager
    from src.utils.logger import LoggerSetup, get_logger, log_context
except ImportError as e:
    print(f"모듈 import 오류: {e}", file=sys.stderr)
    print("의존성 설치가 필요합니다: pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2
EXIT_AUDIT = 3
EXIT_NONCONVERGENCE = 4

# 값 없이 --enumerate-k 를 주면 설정의 enumerate_k_max 사용
SETTINGS_K = object()

logger = get_logger(__name__)


class UsageError(Exception):
    """플래그 조합 오류 (종료 코드 2)"""


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _k_range(text: str) -> int:
    """'0..6' 또는 '6' 을 K 로 변환"""
    text = text.strip()
    if ".." in text:
        low, high = text.split("..", 1)
        if int(low) != 0:
            raise argparse.ArgumentTypeError("k 범위는 0 부터 시작해야 합니다")
        return int(high)
    return int(text)


def _print_json(payload) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2))


def build_parser() -> argparse.ArgumentParser:
    """명령줄 파서 생성"""
    parser = argparse.ArgumentParser(
        prog="nash-stream",
        description="온라인 내쉬 복지 할당: 인스턴스 생성, 알고리즘 실행, 벤치마크, 비율 계산",
    )
    parser.add_argument("--log-level", default=None, help="로그 레벨 (DEBUG, INFO, WARNING, ERROR)")
    parser.add_argument("--log-file", action="store_true", help="logs/ 디렉토리에 로그 파일 기록")
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen", help="인스턴스 파일 생성")
    gen.add_argument("--family", required=True,
                     help="생성기 종류: " + ", ".join(f.replace("_", "-") for f in FAMILIES))
    gen.add_argument("--n", type=int, help="하드 인스턴스 크기 n")
    gen.add_argument("--copies", type=int, help="copies 의 복제 수 m")
    gen.add_argument("--base-family", help="copies 의 기반 생성기 종류")
    gen.add_argument("--agents", type=int, help="에이전트 수 N")
    gen.add_argument("--items", type=int, help="아이템 수 T")
    gen.add_argument("--lambda", dest="lambda_target", type=float, help="목표 균형 비율")
    gen.add_argument("--density", type=float, help="이진 인스턴스 포함 확률")
    gen.add_argument("--seed", type=int, help="난수 시드")
    gen.add_argument("--order", default=None, choices=["interleaved", "sequential"], help="copies 도착 순서")
    gen.add_argument("--number-format", default=None, choices=["double", "decimal"], help="숫자 저장 형식")
    gen.add_argument("--solve", action="store_true", help="μ* 도 계산하여 출력")
    gen.add_argument("-o", "--output", required=True, help="출력 인스턴스 파일")

    run = subparsers.add_parser("run", help="온라인 알고리즘 실행")
    run.add_argument("instance", help="인스턴스 파일")
    run.add_argument("--alg", required=True, choices=list(ALGORITHMS), help="알고리즘")
    run.add_argument("--lambda", dest="lam", type=float, help="half-and-half 의 λ (≥ 1)")
    run.add_argument("--mu", type=float, help="rounded 의 μ (≥ 1)")
    run.add_argument("--seed", type=int, help="추측 알고리즘의 시드")
    run.add_argument("--k", type=int, help="추측 알고리즘의 k 직접 지정")
    run.add_argument("--allocation-out", help="할당 CSV 출력 경로")
    run.add_argument("--report-out", help="보고서 CSV 출력 경로")
    run.add_argument("--audit", action="store_true", help="트레이스 불변식 감사")
    run.add_argument("--no-opt", action="store_true", help="오프라인 최적값 계산 생략")
    run.add_argument("--strict", action="store_true", help="솔버 비수렴 시 종료 코드 4")

    bench = subparsers.add_parser("bench", help="벤치마크 스위트 실행")
    bench.add_argument("--families", type=_name_list, default=None,
                       help="쉼표 구분 생성기 종류 (생략 시 기본 데스크 스위트, 빈 문자열이면 빈 스위트)")
    bench.add_argument("--agents", type=_int_list, default=[2, 4, 8], help="쉼표 구분 N 목록")
    bench.add_argument("--items", type=int, default=50, help="아이템 수 T")
    bench.add_argument("--lambdas", type=_float_list, default=[1.0, 2.0, 16.0], help="쉼표 구분 λ 목록")
    bench.add_argument("--densities", type=_float_list, default=[0.5], help="쉼표 구분 density 목록")
    bench.add_argument("--hard-n", type=_int_list, default=[3, 4, 5, 6], help="쉼표 구분 하드 인스턴스 n 목록")
    bench.add_argument("--seeds", type=_int_list, default=[0, 1, 2], help="쉼표 구분 시드 목록")
    bench.add_argument("--algorithms", type=_name_list, default=list(ALGORITHMS), help="쉼표 구분 알고리즘 목록")
    bench.add_argument("--copies", type=_int_list, default=[2], help="copies 의 쉼표 구분 복제 수 목록")
    bench.add_argument("--base-family", default="hard-table2", help="copies 의 기반 생성기 종류")
    bench.add_argument("--order", default=None, choices=["interleaved", "sequential"],
                       help="copies 도착 순서 (기본: 설정의 copies_order)")
    bench.add_argument("--enumerate-k", type=_k_range, nargs="?", const=SETTINGS_K, default=None,
                       help="추측 알고리즘 k 전수 평가 범위 (예: 0..6, 값 생략 시 설정의 enumerate_k_max)")
    bench.add_argument("--threads", type=int, default=None, help=f"작업 스레드 수 (기본: {THREADS_ENV})")
    bench.add_argument("--strict", action="store_true", help="솔버 비수렴 시 종료 코드 4")
    bench.add_argument("-o", "--output", required=True, help="보고서 CSV 출력 경로")

    ratios = subparsers.add_parser("ratios", help="λ*, μ* 계산")
    ratios.add_argument("instance", help="인스턴스 파일")
    ratios.add_argument("--tol", type=float, default=None, help="Frank-Wolfe 간격 허용 오차")
    return parser


def _solve(inst, settings, strict: bool):
    return solve_eg(inst, tol=settings.eg_tolerance, max_iterations=settings.eg_max_iterations,
                    step_rule=settings.eg_step_rule, strict=strict)


def cmd_gen(args, settings) -> int:
    """gen 서브커맨드"""
    spec = GeneratorSpec(
        family=args.family, n=args.n, copies=args.copies, base_family=args.base_family,
        num_agents=args.agents, num_items=args.items, lambda_target=args.lambda_target,
        density=args.density, seed=args.seed, order=args.order or settings.copies_order,
    )
    is_valid, errors = spec.validate()
    if not is_valid:
        raise UsageError("; ".join(errors))

    inst = generate(spec)
    path = DataManager().save_instance(inst, args.output, args.number_format or settings.number_format)

    payload = {"path": str(path), "num_agents": inst.num_agents, "num_items": inst.num_items}
    try:
        payload["balance_ratio"] = balance_ratio(inst)
    except UndefinedRatioError as e:
        logger.warning(str(e))
        payload["balance_ratio"] = None
        payload["zero_agents"] = e.agents
    if args.solve and payload["balance_ratio"] is not None:
        report = ratio_report(inst, _solve(inst, settings, settings.strict_solver))
        payload["impartiality_ratio"] = report.impartiality_ratio
        payload["impartiality_fw_gap"] = report.fw_gap
    _print_json(payload)
    return EXIT_OK


def cmd_run(args, settings) -> int:
    """run 서브커맨드"""
    if args.alg == "half-and-half":
        if args.lam is None:
            raise UsageError("half-and-half 에는 --lambda 가 필요합니다")
        if not args.lam >= 1:
            raise UsageError(f"--lambda 는 1 이상이어야 합니다: {args.lam}")
    if args.alg == "rounded":
        if args.mu is None:
            raise UsageError("rounded 에는 --mu 가 필요합니다")
        if not args.mu >= 1:
            raise UsageError(f"--mu 는 1 이상이어야 합니다: {args.mu}")
    if args.alg in GUESSED_ALGORITHMS and args.seed is None and args.k is None:
        raise UsageError(f"{args.alg} 에는 --seed 또는 --k 가 필요합니다")
    if args.strict:
        settings.strict_solver = True

    data_manager = DataManager()
    inst = data_manager.load_instance(args.instance)
    trace = run_algorithm(inst, args.alg, lam=args.lam, mu=args.mu, seed=args.seed, k=args.k,
                          level_cap=settings.level_cap, gain_tolerance=settings.gain_tolerance)
    if args.audit:
        audit_trace(trace, settings)

    runner = BenchRunner(settings)
    spec = GeneratorSpec(family="file")
    instance_id = Path(args.instance).stem
    if args.no_opt:
        context = InstanceContext(instance_id, spec, inst, None, None, None)
    else:
        context = runner.prepare_context(instance_id, spec, inst)
    row = runner.make_row(context, trace, args.alg, seed=args.seed, k=args.k, lam=args.lam)

    if args.allocation_out:
        data_manager.save_allocation(trace.allocation, args.allocation_out)
    if args.report_out:
        data_manager.save_report([row], args.report_out)
    _print_json(row.to_dict())
    return EXIT_OK


def _family_specs(family: str, args) -> List[GeneratorSpec]:
    """bench 플래그에서 한 생성기 종류의 사양 목록 구성"""
    if family in HARD_FAMILIES:
        return [GeneratorSpec(family, n=n) for n in args.hard_n]
    if family == "random_balanced":
        return [GeneratorSpec(family, num_agents=n, num_items=args.items, lambda_target=lam, seed=seed)
                for seed in args.seeds for n in args.agents for lam in args.lambdas]
    if family == "random_binary":
        return [GeneratorSpec(family, num_agents=n, num_items=args.items, density=density, seed=seed)
                for seed in args.seeds for n in args.agents for density in args.densities]
    if family == "copies":
        base_family = normalize_family(args.base_family)
        if base_family == "copies":
            raise UsageError("copies 의 기반 종류로 copies 를 쓸 수 없습니다")
        return [GeneratorSpec("copies", copies=m, base_family=base_family, n=base.n,
                              num_agents=base.num_agents, num_items=base.num_items,
                              lambda_target=base.lambda_target, density=base.density, seed=base.seed,
                              order=args.order)
                for base in _family_specs(base_family, args) for m in args.copies]
    raise UsageError(f"bench 에서 지원하지 않는 생성기 종류: {family}")


def build_suite(args, settings) -> BenchSuite:
    """bench 플래그에서 스위트 구성"""
    for algorithm in args.algorithms:
        if algorithm not in ALGORITHMS:
            raise UsageError(f"알 수 없는 알고리즘: {algorithm}")
    enumerate_k = args.enumerate_k
    if enumerate_k is SETTINGS_K:
        enumerate_k = settings.enumerate_k_max
    if args.order is None:
        args.order = settings.copies_order

    if args.families is None:
        suite = BenchSuite.desk_suite(args.seeds, enumerate_k)
        suite.algorithms = args.algorithms
        return suite

    generators = []
    for family in args.families:
        generators.extend(_family_specs(normalize_family(family), args))
    return BenchSuite(generators=generators, algorithms=args.algorithms, seeds=args.seeds,
                      enumerate_k=enumerate_k)


def cmd_bench(args, settings) -> int:
    """bench 서브커맨드"""
    if args.strict:
        settings.strict_solver = True
    suite = build_suite(args, settings)
    rows = BenchRunner(settings, threads=args.threads).run(suite)
    path = DataManager().save_report(rows, args.output)
    print(str(path))
    return EXIT_OK


def cmd_ratios(args, settings) -> int:
    """ratios 서브커맨드"""
    inst = DataManager().load_instance(args.instance)
    zero_agents = [int(i) for i, value in enumerate(monopolist_utilities(inst)) if value <= 0]
    if zero_agents:
        raise UndefinedRatioError(f"독점 효용이 0 인 에이전트: {zero_agents}", agents=zero_agents)
    if args.tol is not None:
        settings.eg_tolerance = args.tol
    report = ratio_report(inst, _solve(inst, settings, settings.strict_solver))
    _print_json(report.to_dict())
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "bench": cmd_bench, "ratios": cmd_ratios}


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    settings = config.get_settings()
    if not config.validate_settings():
        config.fix_settings()
    settings = config.get_settings()
    log_level = args.log_level or settings.log_level
    LoggerSetup.setup_logging(
        log_dir=config.get_log_directory(),
        log_level=log_level,
        enable_console=config.is_logging_enabled(),
        enable_file=args.log_file or config.is_file_logging_enabled(),
    )
    logger.debug(f"{config.get_app_name()} v{config.get_app_version()} ({config.get_platform()}): {args.command}")

    # 명령 실행마다 설정 사본 사용
    run_settings = type(settings).from_dict(settings.to_dict())
    try:
        with log_context(command=args.command):
            return COMMANDS[args.command](args, run_settings)
    except (UsageError, PreconditionError, RefusalError) as e:
        print(f"사용법 오류: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AuditViolationError as e:
        print(f"감사 실패 [{e.invariant}]: {e}", file=sys.stderr)
        return EXIT_AUDIT
    except SolverNonconvergenceError as e:
        print(f"솔버 비수렴: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except UndefinedRatioError as e:
        print(f"비율을 정의할 수 없습니다. 가치가 모두 0 인 에이전트: {e.agents}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except (InstanceFormatError, FileNotFoundError, OSError) as e:
        print(f"데이터 오류: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except NashStreamError as e:
        logger.error(f"처리 오류: {e}", exc_info=True)
        return EXIT_DATA_ERROR
    except Exception as e:
        print(f"예기치 않은 오류: {e}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_DATA_ERROR
    finally:
        LoggerSetup.shutdown()


if __name__ == "__main__":
    sys.exit(main())
