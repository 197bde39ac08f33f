"""
NashStream - 테스트 패키지
모듈별 pytest 스위트와 수용 기준 검사
"""

__version__ = "1.0.0"
__author__ = "NashStream Team"
