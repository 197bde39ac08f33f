#!/usr/bin/env python3
"""
NashStream - 테스트 실행 스크립트
모든 테스트 파일을 순차적으로 실행합니다.
"""
import sys
import os
import subprocess
import time

ROOT = os.path.dirname(os.path.abspath(__file__))


def run_test(test_file, include_slow):
    """개별 테스트 파일 실행"""
    print(f"\n{'='*60}")
    print(f"🧪 테스트 실행: {test_file}")
    print(f"{'='*60}")

    command = [sys.executable, "-m", "pytest", "-q", test_file]
    if not include_slow:
        command += ["-m", "not slow"]

    try:
        result = subprocess.run(
            command,
            cwd=ROOT,
            capture_output=True,
            text=True,
            timeout=1800
        )

        if result.returncode in (0, 5):  # 5: 선택된 테스트 없음
            print("✅ 테스트 성공")
            print(result.stdout)
        else:
            print("❌ 테스트 실패")
            print(result.stdout)
            print(result.stderr)

        return result.returncode in (0, 5)

    except subprocess.TimeoutExpired:
        print("⏰ 테스트 시간 초과")
        return False
    except Exception as e:
        print(f"💥 테스트 실행 오류: {e}")
        return False


def main():
    """메인 테스트 실행 함수 (--slow 로 수용 기준 전체 실행)"""
    include_slow = "--slow" in sys.argv[1:]
    print("🚀 NashStream - 테스트 스위트")
    print("=" * 60)

    test_files = [
        "tests/test_welfare.py",
        "tests/test_waterfill.py",
        "tests/test_online_allocators.py",
        "tests/test_eisenberg_gale.py",
        "tests/test_instance_generator.py",
        "tests/test_invariant_auditor.py",
        "tests/test_data_manager.py",
        "tests/test_logger.py",
        "tests/test_bench_runner.py",
        "tests/test_cli.py",
        "tests/test_acceptance.py",
    ]

    results = []
    for test_file in test_files:
        if os.path.exists(os.path.join(ROOT, test_file)):
            success = run_test(test_file, include_slow)
            results.append((test_file, success))
            time.sleep(0.2)
        else:
            print(f"⚠️ 테스트 파일을 찾을 수 없음: {test_file}")
            results.append((test_file, False))

    print(f"\n{'='*60}")
    print("📊 테스트 결과 요약")
    print(f"{'='*60}")

    passed = sum(1 for _, success in results if success)
    failed = len(results) - passed
    for test_file, success in results:
        status = "✅ 통과" if success else "❌ 실패"
        print(f"{test_file}: {status}")

    print(f"\n총 테스트 파일: {len(results)}개")
    print(f"통과: {passed}개")
    print(f"실패: {failed}개")

    if failed == 0:
        print("\n🎉 모든 테스트가 통과했습니다!")
        return 0
    print(f"\n⚠️ {failed}개의 테스트 파일이 실패했습니다.")
    return 1


if __name__ == "__main__":
    sys.exit(main())
