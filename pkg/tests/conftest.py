import os

# Sin archivos de log durante los tests
os.environ.setdefault("OPHC_LOG_TO_FILE", "false")
os.environ.setdefault("OPHC_WORKERS", "1")
