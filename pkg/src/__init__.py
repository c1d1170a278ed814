"""QD Anyon Simulator - 양자 이중 격자 모형 희소 상태벡터 시뮬레이터"""

__version__ = "0.1.0"
