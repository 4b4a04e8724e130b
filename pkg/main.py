# main.py
"""
Точка входа приложения - GUI Xplore Toolkit.

Запуск:
    python main.py <подкоманда> [флаги]
    python main.py run --config pipeline.toml
"""
import sys

from xplore.cli import main

if __name__ == "__main__":
    sys.exit(main())
