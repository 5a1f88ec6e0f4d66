"""Browser-side capture: WebDriver client, robots.txt, click-path search and site capture."""
