"""
Spectral Averages - Services Layer
Provides the operations the command line runs, on top of the core modules.
"""
from .measure_service import MeasureService
from .average_service import AverageService
from .verify_service import VerifyService
from .export_service import ExportService

__all__ = ['MeasureService', 'AverageService', 'VerifyService', 'ExportService']
